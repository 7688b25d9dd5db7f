"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import random
import timeit

from banipa import _fallback

try:
    from banipa import _core
except ImportError:
    _core = None


def workloads(seed=0):
    rng = random.Random(seed)
    ref = [rng.randrange(40) for _ in range(30)]
    hyp = [w if rng.random() < 0.8 else rng.randrange(40) for w in ref]
    pool = list("আমিভাতখাইসেবইপড়ে") + list("০১২৩৪৫") + list("abcXYZ09") + list(" ।,?!")
    text = "".join(rng.choices(pool, k=400))
    return {
        "edit_ops 30x30 words": lambda m: m.edit_ops(ref, hyp),
        "char_runs 400 chars": lambda m: m.char_runs(text, frozenset()),
    }


def best_of(fn, mod, repeat, number):
    return min(timeit.repeat(lambda: fn(mod), repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled core not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'kernel':<24}{'python us':>12}{'compiled us':>14}{'speedup':>10}")
    for name, fn in workloads().items():
        if _core is not None:
            assert fn(_core) == fn(_fallback), name
        py = best_of(fn, _fallback, args.repeat, args.number)
        if _core is None:
            print(f"{name:<24}{py * 1e6:>12.1f}{'-':>14}{'-':>10}")
            continue
        c = best_of(fn, _core, args.repeat, args.number)
        print(f"{name:<24}{py * 1e6:>12.1f}{c * 1e6:>14.2f}{py / c:>9.1f}x")


if __name__ == "__main__":
    main()
