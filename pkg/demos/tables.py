"""Print the reflection counts and the open (G_0, d) cases after both bounds."""
from srgroups.verdict import CHAMP_DATA, open_table, reflection_table, refined_lower_bound


def main():
    print(f"{'G_0':8} {'ST':>3} {'N':>4} {'min d':>6}")
    for row in reflection_table():
        print(f"{row.g0.label():8} {row.to_dict()['shephard_todd']:>3} {row.n_reflections:>4} {row.minimal_d:>6}")

    crude, refined = open_table("crude"), open_table("refined")
    print(f"\nopen cases: {sum(map(len, crude.values()))} after the crude bound, "
          f"{sum(map(len, refined.values()))} after the refined bound")
    for g0, ds in crude.items():
        keep = set(refined[g0])
        print(f"  {g0.label():8} " + " ".join(f"{d}" if d in keep else f"({d})" for d in ds))

    print("\nrefined lower bounds")
    for rec in CHAMP_DATA:
        if rec.has_data:
            print(f"  {rec.g0.label():8} k={rec.k:<3} m={rec.m}  d >= {refined_lower_bound(rec)}")


if __name__ == "__main__":
    main()
