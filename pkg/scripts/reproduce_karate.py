"""Karate club: quality of faction ~ phi, method comparison, coefficients and triads per faction."""

import argparse
import json

from signrel.evaluation import METHOD_LABELS, SplitPolicy, format_report_table
from signrel.experiments import karate_factions, karate_reproduction
from signrel.social import triad_importance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also dump the numbers here")
    args = ap.parse_args()

    res = karate_reproduction(SplitPolicy(k=args.folds, seed=args.seed))
    print(format_report_table({"in-sample": res.in_sample, "out-of-sample": res.out_of_sample},
                              "faction ~ phi (leader contrast)"))
    print("per-fold BA:", ", ".join(f"{s:.3f}" for s in res.out_of_sample.fold_scores))
    print()
    print(format_report_table({METHOD_LABELS[m]: r for m, r in res.comparison.items()}, "method comparison"))
    print()
    se = res.fit.std_errors
    for k in ("a", "b"):
        print(f"{k} = {res.fit.coef[k]:+.3f}  (se {se[k]:.3f})")
    print(f"c = {res.fit.intercept:+.3f}  separated={res.fit.separated}")
    print()

    factions, leaders = karate_factions()
    out = {"triads": {}}
    for (fac, members), leader in zip(factions.items(), leaders):
        for mode in ("all", "involving", "excluding"):
            rep = triad_importance(res.signed, members, mode=mode, node=None if mode == "all" else leader,
                                   name=f"{fac} {mode}" + ("" if mode == "all" else f" {leader}"))
            print(rep.summary())
            out["triads"][rep.group] = rep.relative
    if args.json:
        out.update({
            "coef": res.fit.coef, "intercept": res.fit.intercept,
            "ba": {METHOD_LABELS[m]: r.balanced_accuracy for m, r in res.comparison.items()},
            "in_sample_ba": res.in_sample.balanced_accuracy,
        })
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
