"""Decode one window of attacked measurements from a small linear system."""

import numpy as np

from secest import LtiSystem, MeasurementWindow, decode, decoder_matrices

rng = np.random.default_rng(0)

# four modes, four sensors, every sensor sees every mode
A = np.diag([0.3, 0.5, 0.7, 0.9])
C = rng.uniform(0.5, 1.5, size=(4, 4))
sys = LtiSystem(A=A, C=C)

T = 8
dm = decoder_matrices(sys, T)
print("stack", dm.Phi.shape, "residual space", dm.Q2.shape[1])

x0 = rng.standard_normal(4)
E = np.zeros((T, 4))
E[:, 2] = 1e4 * rng.standard_normal(T)  # one sensor lies, by a lot
Y = dm.Phi @ x0 + E.ravel()

res = decode(dm, MeasurementWindow(Y=Y, T=T, p=4))
print("status", res.status.value)
print("x0 error", np.abs(res.x0_hat - x0).max())
print("attacked sensors per step", [s.tolist() for s in res.attack.support])

# plain least squares has no such luck
x_ls = np.linalg.lstsq(dm.Phi, Y, rcond=None)[0]
print("least-squares x0 error", np.abs(x_ls - x0).max())
