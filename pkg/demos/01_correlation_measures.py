# # Correlation measures of the binary digit sum
#
# For a fixed shift a, the quantity s_2(n + a) - s_2(n) takes the value d on a
# set of integers n with a natural density mu_a(d). These densities form a
# probability measure on the integers. Every value is a dyadic rational, and
# below some threshold the measure is exactly geometric, so it fits in a
# finite object.

from digitcorr import DigitString, cusick_c, density_scan, measure_of, moment

# ## A first example: a = 3
#
# The dump lists the window by decreasing d, then the geometric tail:
# mu_3(d) = t * 2^d for every d below the threshold.

mu3 = measure_of(3)
print("\n".join(mu3.dump_lines()))

# ## Counting by brute force
#
# The oracle just computes popcounts over [0, N). With N = 2^22 the
# agreement is already to the last printed digit.

scan = density_scan(3, 1 << 22, (-6, 3))
for e in scan.estimates:
    print(f"d={e.d:3d}  counted {e.density:.6f}  exact {float(mu3(e.d)):.6f}")
print("out of window:", scan.out_of_window, " carry cross-checks:", scan.checked, "mismatches:", scan.mismatches)

# ## Exact invariants
#
# The mass is 1 and the mean is 0 for every a. The variance grows with the
# number of sign changes in the binary expansion of a.

for a in [1, 3, 5, 0b101010101, 0b111111111]:
    mu = measure_of(a)
    print(f"a={a:>4} ({a:b})  mass={mu.mass()}  mean={moment(mu, 1)}  variance={float(moment(mu, 2)):.5f}")

# Leading zeros do not change anything.

print(measure_of(DigitString.from_int(11).padded(6)) == measure_of(11))

# ## The Cusick quantity
#
# c_a is the mass of mu_a on d >= 0. It is conjectured to stay above 1/2.

for a in [1, 3, 7, 21, 85, 341]:
    print(a, cusick_c(a), float(cusick_c(a)))
