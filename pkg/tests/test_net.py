"""Time-indexed network units: construction, exact inference, dual routes.

The two-action hand case fixes one posterior by pencil and paper: with
p0 := s1 (prior 0.8) and p1 := p0 and s2 (prior 0.7), observing p1 false
leaves P(s1) = 0.8*0.3 / (0.8*0.3 + 0.2) = 6/11.
"""

import pytest

import gen
from retrace.model import LiteralSetWorld, ground_action, parse_literal, parse_model
from retrace.net import TraceNet, ZeroEvidence, brute_force_posterior, node_name

TINY = """
(:model tiny
  (:params (f1 0.2) (f2 0.3))
  (:action first
    (:precondition (and))
    (:postcondition (p0))
    (:update (:var ?s f1) (:set (p0) ?s)))
  (:action second
    (:precondition (and))
    (:postcondition (p1))
    (:update (:var ?s f2) (:set (p1) (and (p0) ?s)))))
"""


def lit(text):
    return parse_literal(text)


@pytest.fixture
def tiny_net():
    model = parse_model(TINY)
    w = LiteralSetWorld(frozenset())
    net = TraceNet()
    net.extend(ground_action(model, "first", (), w))
    net.extend(ground_action(model, "second", (), w))
    return net


def test_node_layout(tiny_net):
    assert set(tiny_net.nodes) == {
        ("act", 1, "?s"),
        ("lit", 1, lit("p0()")),
        ("act", 2, "?s"),
        ("lit", 2, lit("p1()")),
    }
    assert tiny_net.t == 2
    assert tiny_net.latest_node(lit("p0()")) == ("lit", 1, lit("p0()"))
    assert tiny_net.success_node(2) == ("act", 2, "?s")
    p1 = tiny_net.nodes[("lit", 2, lit("p1()"))]
    assert set(p1.parents) == {("lit", 1, lit("p0()")), ("act", 2, "?s")}


def test_forward_marginals(tiny_net):
    fwd = tiny_net.forward()
    assert fwd[("lit", 1, lit("p0()"))] == pytest.approx(0.8, abs=1e-12)
    assert fwd[("lit", 2, lit("p1()"))] == pytest.approx(0.8 * 0.7, abs=1e-12)


def test_hand_computed_posterior(tiny_net):
    post = tiny_net.posterior({("lit", 2, lit("p1()")): False})
    assert post[("act", 1, "?s")] == pytest.approx(6 / 11, abs=1e-12)
    # the evidence node itself reads back as its asserted value
    assert post[("lit", 2, lit("p1()"))] == 0.0


def test_posterior_matches_enumeration(tiny_net):
    ev = {("lit", 2, lit("p1()")): False}
    ve = tiny_net.posterior(ev)
    bf = brute_force_posterior(tiny_net, ev)
    assert ve.keys() == bf.keys()
    for k in ve:
        assert ve[k] == pytest.approx(bf[k], abs=1e-12)


def test_contradictory_evidence_raises(tiny_net):
    ev = {("lit", 1, lit("p0()")): True, ("act", 1, "?s"): False}
    with pytest.raises(ZeroEvidence):
        tiny_net.posterior(ev)
    with pytest.raises(ZeroEvidence):
        brute_force_posterior(tiny_net, ev)


def test_unknown_nodes_rejected(tiny_net):
    with pytest.raises(KeyError):
        tiny_net.posterior({("lit", 9, lit("p0()")): True})
    with pytest.raises(KeyError):
        tiny_net.posterior({}, [("act", 9, "?s")])


def test_query_subset(tiny_net):
    out = tiny_net.posterior({}, [("act", 2, "?s")])
    assert list(out) == [("act", 2, "?s")]
    assert out[("act", 2, "?s")] == pytest.approx(0.7, abs=1e-12)


def test_forward_cache_resets_on_extend():
    model = parse_model(TINY)
    w = LiteralSetWorld(frozenset())
    net = TraceNet()
    net.extend(ground_action(model, "first", (), w))
    first = net.forward()
    assert len(first) == 2
    net.extend(ground_action(model, "second", (), w))
    assert len(net.forward()) == 4


def test_enumeration_caps_at_24_nodes():
    model = parse_model(TINY)
    w = LiteralSetWorld(frozenset())
    net = TraceNet()
    for _ in range(13):
        net.extend(ground_action(model, "first", (), w))
    assert len(net.nodes) == 26
    with pytest.raises(ValueError, match="caps at 24"):
        brute_force_posterior(net)


def test_random_chains_match_enumeration():
    compared = 0
    for seed in range(40):
        net, evidence = gen.random_chain(seed)
        try:
            ve = net.posterior(evidence)
        except ZeroEvidence:
            with pytest.raises(ZeroEvidence):
                brute_force_posterior(net, evidence)
            continue
        bf = brute_force_posterior(net, evidence)
        for k in ve:
            assert ve[k] == pytest.approx(bf[k], abs=1e-9), (seed, k)
        compared += 1
    assert compared >= 25


def test_rendering(tiny_net):
    assert node_name(("act", 1, "?s")) == "act:1:?s"
    assert node_name(("lit", 2, lit("p1()"))) == "lit:2:p1()"
    dump = tiny_net.dump()
    assert "act:1:?s | - | " in dump
    assert len(dump.splitlines()) == 4
    dot = tiny_net.to_dot()
    assert '"lit:1:p0()" -> "lit:2:p1()"' in dot
    assert dot.startswith("digraph trace {")


def test_fallback_enumeration_kernel_matches_active_backend(monkeypatch):
    """Whichever kernel import selected, the NumPy fallback must agree."""
    import retrace.net as net_mod
    from retrace._core import pure

    for seed in range(12):
        net, evidence = gen.random_chain(seed, max_nodes=14)
        try:
            want = net_mod.brute_force_posterior(net, evidence, None)
        except ZeroEvidence:
            with monkeypatch.context() as m:
                m.setattr(net_mod, "_core", pure)
                with pytest.raises(ZeroEvidence):
                    net_mod.brute_force_posterior(net, evidence, None)
            continue
        with monkeypatch.context() as m:
            m.setattr(net_mod, "_core", pure)
            got = net_mod.brute_force_posterior(net, evidence, None)
        assert want.keys() == got.keys()
        for node in want:
            assert abs(want[node] - got[node]) <= 1e-12
