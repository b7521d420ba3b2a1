"""Sort every parameter subset into a time-normalised scaling class.

Each cell combines the C_S exponent with the cost of preparing the probe:
an adiabatic sweep for the ground state, relaxation for the steady state.
Labels are T^-n for a bound that shrinks as a power of the preparation
time, O(1) when time brings no gain, S for a singular matrix and '-' where
the parameter is absent from the model. Takes a few seconds.
"""

from critmet import ModelParams
from critmet.scan import run_table1

table = run_table1(ModelParams(omega_c=1.0, omega_a=0.7, kappa=0.1), gamma=0.1, slope=1.0)
print(table.to_text())
