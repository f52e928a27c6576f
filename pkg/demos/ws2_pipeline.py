"""Walk through the W(S_2) stabilizer computation step by step."""
import sys
import time

from srgroups.ws2 import molien, pipeline_groups, stabilizer_pipeline, sym_invariants_monomial


def main(cache_dir=None):
    t = time.perf_counter()
    rep = stabilizer_pipeline(full=False, cache_dir=cache_dir)
    print(f"pipeline finished in {time.perf_counter() - t:.1f} s")
    for key, val in rep.to_dict().items():
        print(f"  {key:28} {val}")

    _, _, HW, HL = pipeline_groups(cache_dir)
    print(f"\nMolien series on <w_1, w_2, w_3>: {molien(HL)}")
    print(f"degrees: {molien(HL).degrees()}")
    series = molien(HW).series(7)
    counts = [sym_invariants_monomial(HW.generators, k) for k in range(7)]
    print(f"invariants of Sym^k on W, k = 0..6: Molien {[int(x) for x in series]}, orbit count {counts}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
