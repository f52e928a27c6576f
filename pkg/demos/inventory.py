"""Symplectic reflections of E(G) for a few groups, with their conjugacy classes."""
import sys

from srgroups.families import parse_spec
from srgroups.reflect import inventory


def main(specs):
    for text in specs:
        spec = parse_spec(text).base
        s = inventory(spec).summary()
        print(f"{spec.label()}: |S| = {s['symplectic_reflections']} = N + d = {s['N']} + {s['d']}, "
              f"{s['classes']} classes ({s['dd_part_classes']} in the D_d part)")
        for name, ok in s["checks"].items():
            print(f"    {'ok ' if ok else 'BAD'} {name}")


if __name__ == "__main__":
    main(sys.argv[1:] or ["muT:18", "muO:20", "OT:10"])
