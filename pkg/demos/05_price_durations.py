# Prices change more often when inflation is high
#
# Fifty price setters with menu costs face monthly inflation rising from 1% to
# 100%.  Each keeps its nominal price until the gap to its desired price
# exceeds a band.  The average number of days since the last increase should
# fall as inflation rises.

import numpy as np
from scipy import stats

from debtinflation.shocks import (log_inflation, mean_duration_by_date,
                                  simulate_menu_cost_prices)

aggregate, setters = simulate_menu_cost_prices(np.geomspace(0.01, 1.0, 60), 50, seed=0)
infl = log_inflation(aggregate, 12)
days = mean_duration_by_date(setters, infl.index)

for when in infl.index[::8]:
    print(when.date(), f"{infl[when]:8.1f}", f"{days[when]:6.1f}")

rho, p = stats.spearmanr(infl.to_numpy(), days.to_numpy())
print(f"Spearman {rho:.3f}, p = {p:.2g}")
