# How much of a firm's balance sheet does inflation wipe out?
#
# A firm financed with 43% nominal debt gains the real value of that debt as
# prices rise.  The gain, as a share of assets, climbs quickly and then
# flattens at the leverage ratio itself.

import datetime as dt

import numpy as np

from debtinflation.shocks import (LeverageBase, PricePath, debt_inflation,
                                  debt_inflation_series, log_inflation)

# A stylized monthly price index: flat through 1917, then accelerating.
months = 84
dates = [dt.date(1917 + m // 12, m % 12 + 1, 1) for m in range(months)]
growth = np.concatenate([np.zeros(12), np.geomspace(0.01, 1.5, months - 12)])
prices = PricePath(dates, np.exp(np.cumsum(np.log1p(growth))), "monthly")

firm = LeverageBase("typical", D=43.0, E=57.0)
shock = debt_inflation_series(firm, prices)
print(shock.iloc[11::12].round(4).to_string())

# The closed form, checked by hand for a doubling of prices.
print("doubling with leverage 0.5:", debt_inflation(0.5, 1.0))

# Twelve-month log inflation, in percent, for the same path.
print(log_inflation(prices, 12).iloc[::12].round(1).to_string())
