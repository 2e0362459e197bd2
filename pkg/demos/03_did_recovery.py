# Recovering a planted employment effect
#
# We simulate 700 firms over 1914-1923.  From 1920 on, log employment (times
# 100) rises by 41.6 times the firm's 1917 leverage.  The two-way fixed-effects
# difference-in-differences estimator should find that number, and the event
# study should show flat pre-trends.

from debtinflation.econometrics import did, did_iv, economic_magnitude, event_study
from debtinflation.panel import PanelConfig, simulate_panel

panel = simulate_panel(PanelConfig(n_firms=700, seed=1))
print(panel.head().to_string(index=False))

res = did(panel)
print(res.summary())
print("one-sd leverage effect, percent:", round(economic_magnitude(res.params[0]), 2))

# Industry-by-year effects absorb sector shocks.
print(did(panel, industry_year=True).summary())

# Instrument 1918 leverage with 1917 leverage.
iv = did_iv(panel)
print(iv.summary())

es = event_study(panel)
print(es.table.to_string(index=False))
