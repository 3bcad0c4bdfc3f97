"""SocioPatterns high school 2013: method comparison and gender/class homophily.

Download the contact list, friendship network and metadata from
sociopatterns.org into one directory and pass it as the argument.
"""

import argparse
import sys

from signrel.datasets import find_highschool, read_sociopatterns_contacts, read_sociopatterns_metadata
from signrel.evaluation import METHOD_LABELS, SplitPolicy, format_report_table
from signrel.experiments import highschool_comparison
from signrel.hype import build_possibility_matrix
from signrel.phi import build_signed_network
from signrel.social import homophily


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("root")
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    paths = find_highschool(args.root)
    if paths is None:
        sys.exit(f"high-school files not found under {args.root}")
    reports = highschool_comparison(args.root, SplitPolicy(k=args.folds, seed=args.seed))
    print(format_report_table({METHOD_LABELS[m]: r for m, r in reports.items()}, "friendship ~ interactions"))
    g = read_sociopatterns_contacts(paths["contacts"])
    net = build_signed_network(g, build_possibility_matrix(g))
    meta = read_sociopatterns_metadata(paths["metadata"])
    for attr in ("gender", "class"):
        print(homophily(net, meta, attr).summary())


if __name__ == "__main__":
    main()
