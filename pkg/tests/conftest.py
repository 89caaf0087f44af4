import numpy as np
import pytest
from scipy.integrate import solve_ivp

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def lindblad_oracle(z, lam, measured, t0, t1, rho0, t_eval=None):
    """Diabatic-frame Lindblad equation written out directly, solved with DOP853.

    ``measured`` is "diabatic" (sigma_z) or "adiabatic" ((t sigma_z + sigma_x)/E).
    """

    def f(t, y):
        r = y.reshape(2, 2)
        h = z * (t * SZ + SX)
        a = SZ if measured == "diabatic" else (t * SZ + SX) / np.hypot(t, 1.0)
        ar = a @ r - r @ a
        return (-1j * (h @ r - r @ h) - 0.5 * lam * (a @ ar - ar @ a)).ravel()

    sol = solve_ivp(f, (t0, t1), np.asarray(rho0, complex).ravel(), method="DOP853",
                    rtol=1e-12, atol=1e-13, t_eval=t_eval)
    return sol.t, sol.y.T.reshape(-1, 2, 2)


def ground_projector(t):
    _, v = np.linalg.eigh(t * SZ + SX)
    g = v[:, 0]
    return np.outer(g, g.conj())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
