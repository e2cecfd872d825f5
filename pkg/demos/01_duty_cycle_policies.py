#!/usr/bin/env python3
"""A tour of the duty-cycle policies and the overlap guarantee.

A k-basic policy keeps the radio on for k consecutive ticks, then once in
each of the next k stretches of k ticks: length k^2 + k, cost 2k on-ticks.
Two copies started within one policy span of each other always share an
on-tick, which is the whole foundation of the synchronization protocols.
"""

from radiosync import basic_policy, naive_policy, on_ticks, overlaps, policy_len


def draw(policy, offset=0, width=40):
    cells = ["."] * width
    for t in on_ticks(policy, offset):
        if t < width:
            cells[t] = "#"
    return "".join(cells)


def main():
    print("k-basic policies ('#' = radio on):\n")
    for k in (1, 2, 3, 5):
        p = basic_policy(k)
        print(f"  k={k}  len={policy_len(p):3d}  cost={2*k:2d}   {draw(p)}")

    print("\nTwo 5-basic policies, the second shifted by 13 ticks:\n")
    p = basic_policy(5)
    print("  A:", draw(p, 0, 46))
    print("  B:", draw(p, 13, 46))
    shared = sorted(on_ticks(p, 0) & on_ticks(p, 13))
    print("  shared on-ticks:", shared)

    print("\nOverlap guarantee, k = 4 (span 20):")
    p = basic_policy(4)
    misses = [d for d in range(20) if not overlaps(p, 0, p, d)]
    print(f"  offsets 0..19 all overlap: {not misses}")
    print(f"  offset 20 overlaps: {overlaps(p, 0, p, 20)}  (the guarantee is tight)")

    print("\nThe always-on baseline needs n+1 ticks; the basic policy needs")
    print("2*ceil(sqrt(n)) for the same pairwise guarantee:\n")
    for n in (9, 100, 400):
        k = 1
        while k * k < n:
            k += 1
        print(f"  n={n:4d}: naive cost {n+1:4d}, basic policy cost {2*k:3d}")


if __name__ == "__main__":
    main()
