"""
Raw versus uncertainty-corrected prediction gaps
================================================

A covariate that only changes how uncertain the model is can still look
associated with the raw gap. Dividing each gap by its predictive standard
deviation removes that artefact, and sharpens a real group effect.
"""

import numpy as np

from mccqr import RngState, association_test
from mccqr.gaps import association_table, gaps_from_arrays

n = 2000
s_age, s_bmi, s_z = RngState(0).split(3)
age = 20 + 52 * s_age.uniform(n)
bmi = 26.8 + 4.8 * s_bmi.normal(n)

# sigma rises with BMI; the deviation measured in sigma units does not
sigma = 3.0 * np.exp(0.3 * (bmi - 26.8) / 4.8)
z = 0.5 + s_z.normal(n)
records = gaps_from_arrays(age, age + sigma * z, sigma, {"age": age, "bmi": bmi})
print(association_table(association_test(records, "bmi")))

# now a real group difference in sigma units, with sigma unrelated to group
s_g, s_sig, s_e = RngState(1).split(3)
group = (s_g.uniform(n) < 0.5).astype(float)
sigma = 3.0 * np.exp(0.5 * s_sig.normal(n))
z = 0.3 * group + s_e.normal(n)
records = gaps_from_arrays(age, age + sigma * z, sigma, {"age": age, "group": group})
print()
print(association_table(association_test(records, "group")))
