import numpy as np
import pytest

from g4vspec import ManifoldParams, EmitterModel


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


def random_emitter(rng, spin=None):
    """Physically shaped emitter with randomized couplings."""
    if spin is None:
        spin = float(rng.choice([0.0, 0.5, 1.0, 1.5, 4.5]))
    lam_g = float(rng.uniform(40.0, 900.0))
    lam_e = lam_g * float(rng.uniform(2.0, 5.0))
    afc_g = float(rng.uniform(10.0, 1500.0))
    add_g = afc_g * float(rng.uniform(-0.05, 0.05))
    afc_e = afc_g * float(rng.uniform(-0.5, 0.5))
    add_e = afc_g * float(rng.uniform(-0.3, 0.3))
    return EmitterModel(
        isotope=f"rand{spin}",
        nuclear_spin=spin,
        g_nuclear=float(rng.uniform(-2.5, 2.5)),
        gnd=ManifoldParams(lambda_soc_ghz=lam_g, q_orb=0.1, a_fc_mhz=afc_g, a_dd_mhz=add_g),
        exc=ManifoldParams(lambda_soc_ghz=lam_e, q_orb=0.15, a_fc_mhz=afc_e, a_dd_mhz=add_e),
        strain_alpha_ghz=float(rng.uniform(0.0, 60.0)),
        strain_beta_ghz=float(rng.uniform(0.0, 20.0)),
    )


def local_maxima(signal, prominence_frac=0.01):
    """Indices of local maxima with prominence above a fraction of the max."""
    signal = np.asarray(signal)
    top = signal.max()
    out = []
    for k in range(1, len(signal) - 1):
        if signal[k] > signal[k - 1] and signal[k] >= signal[k + 1]:
            lo_l = signal[k]
            j = k - 1
            while j >= 0 and signal[j] <= signal[k]:
                lo_l = min(lo_l, signal[j])
                j -= 1
            lo_r = signal[k]
            j = k + 1
            while j < len(signal) and signal[j] <= signal[k]:
                lo_r = min(lo_r, signal[j])
                j += 1
            if signal[k] - max(lo_l, lo_r) >= prominence_frac * top:
                out.append(k)
    return out
