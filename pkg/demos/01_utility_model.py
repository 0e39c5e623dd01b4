"""
Utility of an offloading decision
=================================

Each user either stays on the cellular base station (BS), is offloaded to
the WiFi access point (AP), or stays silent. The operator earns ``lam`` per
nat carried by the BS and ``lam - mu`` per nat carried by the AP.
"""

import numpy as np

from offloadsim import Assignment, ScenarioRealization, SicMode, SystemParams, utility

params = SystemParams(lam=1.0, mu=0.5)

# two users: the first hears the BS well, the second the AP
scenario = ScenarioRealization(params, gains_bs=[3.0, 1.0], gains_ap=[1.0, 4.0])
print("SNR at BS:", scenario.snr_bs, " SNR at AP:", scenario.snr_ap)

# "B" = BS, "A" = AP, "-" = off
for code in ("BB", "BA", "AB", "AA", "B-"):
    a = Assignment.from_string(code)
    row = {mode.name: round(utility(scenario, a, mode).utility, 6) for mode in SicMode}
    print(code, row)

# With a SIC decoder the receiver reaches the multiple-access sum rate, so
# SIC at a receiver never hurts. The WW column dominates the OO column above.
b = utility(scenario, Assignment.from_string("BA"), SicMode.WW)
print("BS rate %.4f nats, AP rate %.4f nats, utility %.4f" % (b.rate_bs, b.rate_ap, b.utility))
assert np.isclose(b.utility, np.log(4) + 0.5 * np.log(5))
