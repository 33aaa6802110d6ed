"""Exercise the extension end to end. Run after `pip install`."""

import math

import escaperoom


def main():
    assert escaperoom.TEMPLATES == list("abcdefg")

    g = escaperoom.Graph.template("c")
    assert (g.exit_depth, g.width) == (4, 1)
    assert g.walk_states() == 9
    exact = g.hitting_time()
    mean, se = g.hitting_time_mc(walks=50_000, seed=1)
    assert abs(exact - mean) <= 4 * se, (exact, mean, se)
    assert g.hitting_time(drop_key=True) > exact
    assert escaperoom.Graph.from_spec(g.to_spec()).to_spec() == g.to_spec()

    trivial = escaperoom.Graph.from_spec(
        '{"nodes":[{"id":"start","kind":"start","color":null},'
        '{"id":"exit","kind":"exit","color":null}],'
        '"edges":[["start","exit"]],"key_location":{},"door_host":{}}'
    )
    assert math.isclose(trivial.hitting_time(), 1 / 0.19, abs_tol=1e-9)

    table = escaperoom.ht_table()
    assert [row[1] for row in table] == [2, 2, 4, 2, 2, 4, 6]

    env = escaperoom.Env("a", seed=7)
    obs = env.observe()
    assert len(obs) == 7 and all(len(r) == 7 and all(len(c) == 3 for c in r) for r in obs)
    assert env.counts()[:2] == (1, 1)
    events = []
    for node in ("key_red", "room_red", "exit"):
        for action in env.plan(node):
            obs, reward, done, truncated, ev = env.step(action)
            events += ev
    assert done and reward == 1.0 and not truncated
    assert [e["kind"] for e in events] == ["key_picked", "door_opened", "exit_reached"]
    try:
        env.step(0)
    except ValueError:
        pass
    else:
        raise AssertionError("stepping a finished episode should fail")

    again = escaperoom.Env.from_world_file(env.to_world_file())
    assert again.steps == env.steps and again.is_over
    env.reset()
    assert env.episode == 1 and env.steps == 0

    summary = escaperoom.rollout("b", agent="hippo-oracle", episodes=20, seed=3)
    assert summary["success_rate"] == 1.0
    rates = [escaperoom.rollout(t, episodes=100, seed=2024)["success_rate"] for t in "ag"]
    assert rates[0] > rates[1]
    r = escaperoom.pearson([row[3] for row in table], [float(i) for i in range(7)])
    assert -1.0 <= r <= 1.0

    print("smoke test ok")


if __name__ == "__main__":
    main()
