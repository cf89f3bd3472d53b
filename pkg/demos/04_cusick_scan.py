# # Scanning the Cusick quantity
#
# c_a = sum_{d >= 0} mu_a(d) is conjectured to exceed 1/2 for all a, with
# 1/2 as an accumulation point. The scan walks the pair recursion once over
# all a below the limit, so every c_a is exact.

import time

from digitcorr import cusick_scan

t0 = time.perf_counter()
rep = cusick_scan(1 << 16)
print(f"scanned a < 2^16 in {time.perf_counter() - t0:.1f}s")
print(f"smallest c_a = {rep.minimum} = {rep.minimum_float:.6f} at a = {rep.argmin} ({rep.argmin:b})")
print("values <= 1/2:", rep.violations or "none")
print(f"c_a = c_reverse(a) for all a < 2^10: {not rep.reversal_mismatches}")

# ## Along a_k = 1 + 4 + ... + 4^k
#
# The binary expansion is 10101...01. The values creep toward 1/2 from
# above; the first two happen to coincide at 5/8.

for k, exact, value in rep.trajectory:
    print(f"k={k:2d}  c = {exact:<16}  {value:.6f}")
