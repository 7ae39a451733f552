"""Compare the compiled enumeration kernels against their pure fallbacks.

Two hot loops have both a C implementation and a pure Python one selected at
import time: full-joint enumeration (the reference route for posteriors) and
trace-mask enumeration (the reference route for minimal replays).  This
script times both implementations on the same instances and prints per-call
times and speedups.  Run it from the repository root:

    python3 benchmarks/bench_backends.py
"""

import time
from contextlib import contextmanager

import retrace.net as net_mod
import retrace.recover as recover_mod
from retrace._core import BACKEND, pure
from retrace.model import LiteralSetWorld, ground_action, parse_model
from retrace.net import TraceNet, brute_force_posterior
from retrace.recover import brute_force_trace

try:
    from retrace._core import _native
except ImportError:
    _native = None


def chain_model(n_actions):
    """n zero-parameter actions, each needing and extending a literal chain."""
    lines = ["(:model bench", "  (:params"]
    for k in range(n_actions):
        lines.append(f"    (f{k} {0.1 + 0.03 * (k % 9):.2f})")
    lines.append("  )")
    for k in range(n_actions):
        pre = "(and)" if k == 0 else f"(and (p{k - 1}))"
        update = "?s" if k == 0 else f"(and (p{k - 1}) ?s)"
        lines += [
            f"  (:action a{k}",
            f"    (:precondition {pre})",
            f"    (:postcondition (p{k}))",
            "    (:update",
            f"      (:var ?s f{k})",
            f"      (:set (p{k}) {update})))",
        ]
    lines.append(")")
    return parse_model("\n".join(lines))


def chain_net(n_actions):
    model = chain_model(n_actions)
    world = LiteralSetWorld(frozenset())
    net = TraceNet()
    for k in range(n_actions):
        net.extend(ground_action(model, f"a{k}", (), world))
    evidence = {net.lit_nodes()[-1]: False}
    return net, evidence


def chain_window(n_actions):
    model = chain_model(n_actions)
    world = LiteralSetWorld(frozenset())
    window = tuple(
        ground_action(model, f"a{k}", (), world) for k in range(n_actions)
    )
    return window, frozenset()


@contextmanager
def kernels(module, impl):
    saved = module._core
    module._core = impl
    try:
        yield
    finally:
        module._core = saved


def per_call(fn):
    first = time.perf_counter()
    fn()
    first = time.perf_counter() - first
    if first >= 0.3:
        return first
    calls, total = 0, 0.0
    while total < 0.2 or calls < 3:
        t0 = time.perf_counter()
        fn()
        total += time.perf_counter() - t0
        calls += 1
    return total / calls


def bench(rows, label, size, run):
    with kernels(net_mod, pure), kernels(recover_mod, pure):
        t_pure, out_pure = per_call(run), run()
    if _native is None:
        rows.append((label, size, None, t_pure, out_pure, out_pure))
        return
    with kernels(net_mod, _native), kernels(recover_mod, _native):
        t_native, out_native = per_call(run), run()
    rows.append((label, size, t_native, t_pure, out_native, out_pure))


def main():
    print(f"active backend at import: {BACKEND}")
    if _native is None:
        print("compiled kernels unavailable; timing the pure fallback only")
    rows = []

    for n in (6, 8, 9):
        net, evidence = chain_net(n)
        size = len(net.nodes)
        bench(rows, "joint posterior", f"{size} nodes",
              lambda: brute_force_posterior(net, evidence, None))

    for n in (12, 16, 18):
        window, start = chain_window(n)
        bench(rows, "trace masks", f"{len(window)} actions",
              lambda: brute_force_trace(window, start))

    print(f"{'kernel':<16} {'size':<12} {'native':>10} {'pure':>10} {'speedup':>8}")
    for label, size, t_native, t_pure, out_native, out_pure in rows:
        agree = _agree(out_native, out_pure)
        native_text = f"{t_native:.6f}s" if t_native is not None else "-"
        speedup = f"{t_pure / t_native:7.1f}x" if t_native else "-"
        flag = "" if agree else "  RESULTS DISAGREE"
        print(f"{label:<16} {size:<12} {native_text:>10} {t_pure:.6f}s {speedup:>8}{flag}")
    if any(not _agree(a, b) for _, _, _, _, a, b in rows):
        raise SystemExit(1)


def _agree(a, b):
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(abs(a[k] - b[k]) <= 1e-9 for k in a)
    return a == b


if __name__ == "__main__":
    main()
