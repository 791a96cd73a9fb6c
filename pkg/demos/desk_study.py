"""Desk-scale correlation study.

Runs the corpus in desk_corpus.cfg (64 sub-spaces of 5000 states, about
20 minutes on one core) unless --reuse points at a finished run, then prints
how each algorithm's mean suboptimality tracks the complexity measures and
how well the predictors do against the ZeroR baseline.

    python3 demos/desk_study.py --out desk_out
    python3 demos/desk_study.py --reuse desk_out
"""
import argparse
import os

from rtcomplex import experiment as ex
from rtcomplex.complexity import MEASURES
from rtcomplex.stats import correlation_table, format_table

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="desk_out")
    ap.add_argument("--reuse", help="existing bench output directory")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()
    out = args.reuse
    if not out:
        cfg = ex.load_config(os.path.join(HERE, "desk_corpus.cfg"), out=args.out,
                             workers=args.workers)
        summary = ex.run_experiment(cfg)
        for f in summary.failures:
            print("failure:", f)
        out = cfg.out
    profiles = ex.read_csv(os.path.join(out, "profiles.csv"))
    perf = ex.read_csv(os.path.join(out, "performance.csv"))
    algs = tuple(dict.fromkeys(p["algorithm"] for p in perf))
    index = {(p["space_id"], p["algorithm"]): float(p["mean"]) for p in perf}
    cols = {m: [float(p[m]) for p in profiles] for m in MEASURES}
    for a in algs:
        cols[a] = [index.get((p["space_id"], a), float("nan")) for p in profiles]
    table = correlation_table(cols, [(m, a) for m in MEASURES for a in algs])
    print(f"Spearman rho, mean suboptimality, {len(profiles)} sub-spaces")
    print(format_table(table, list(MEASURES), list(algs)))
    print("\nprediction (10-fold CV)")
    for row in ex.read_csv(os.path.join(out, "predictions.csv")):
        if row["error"]:
            continue
        print(f"  {row['target']:16} {row['model']:7} accuracy {float(row['accuracy']):5.1f}%"
              f"  RRSE {float(row['rrse']):6.1f}")


if __name__ == "__main__":
    main()
