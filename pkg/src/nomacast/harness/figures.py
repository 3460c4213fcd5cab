"""Prebaked scenario configurations, one per reproduced figure."""
from .config import ConfigError, ScenarioConfig

RATES = (1.0, 2.0, 3.0, 4.0, 5.0)
DELTAS = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)

_FIGURES = {
    # iteration counts of the power-min and EE MM loops
    "conv": dict(kind="Convergence", sweep_variable="trial", sweep_values=(0,), model="A",
                 antennas=8, users=3, rate=3.0, rate_pri=1.0, p_tot_dbm=30.0, p_c_w=30.0,
                 ee_model="E", ee_antennas=6, ee_users=5, trials=200),
    # minimum power versus target rate, three schemes plus the relaxation bound
    "f4": dict(kind="PowerMin", sweep_variable="rate", sweep_values=RATES, model="A",
               antennas=8, users=3, schemes=("NOMA", "SDMA", "OMA", "SDR")),
    # minimum power versus region separation
    "f5": dict(kind="PowerMin", sweep_variable="delta_d", sweep_values=DELTAS, model="D",
               antennas=6, users=4, rate=4.0, schemes=("NOMA", "SDMA", "OMA")),
    # minimum power versus rate for several antenna counts
    "f6": dict(kind="PowerMin", sweep_variable="rate", sweep_values=RATES, model="A",
               users=3, series_variable="antennas", series_values=(6, 8, 10),
               schemes=("NOMA", "SDMA")),
    # minimum power versus rate for several group sizes
    "f7": dict(kind="PowerMin", sweep_variable="rate", sweep_values=RATES, model="A",
               antennas=10, series_variable="users", series_values=(2, 3, 4),
               schemes=("NOMA", "SDMA")),
    # minimum power versus rate for the three- and four-region layouts
    "f8": dict(kind="PowerMin", sweep_variable="rate", sweep_values=RATES, model="A",
               antennas=10, users=3, series_variable="gcase", series_values=(1, 2, 3),
               schemes=("NOMA", "SDMA")),
    # fair sum rate versus power budget
    "f10": dict(kind="SumRate", sweep_variable="p_tot_dbm",
                sweep_values=(10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0), model="A",
                antennas=8, users=3, schemes=("NOMA", "SDMA", "OMA")),
    # fair sum rate versus region separation
    "f11": dict(kind="SumRate", sweep_variable="delta_d", sweep_values=DELTAS, model="D",
                antennas=6, users=4, p_tot_dbm=30.0, schemes=("NOMA", "SDMA", "OMA")),
    # energy efficiency versus power budget
    "f13": dict(kind="EE", sweep_variable="p_tot_dbm",
                sweep_values=(20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0), model="E",
                antennas=6, users=5, rate_pri=1.0, p_c_w=30.0,
                schemes=("EEmax", "SEmax", "OMA")),
}

FIGURE_IDS = tuple(_FIGURES)


def replicate_figure(fig_id, trials=None, seed=None, out=None) -> ScenarioConfig:
    """Configuration for ``fig_id``; ``trials``/``seed``/``out`` override the defaults."""
    try:
        kw = dict(_FIGURES[fig_id])
    except KeyError:
        raise ConfigError(f"unknown figure {fig_id!r}; expected one of {FIGURE_IDS}") from None
    cfg = ScenarioConfig(name=fig_id, **kw)
    return cfg.with_overrides(trials=trials, seed=seed, out=out)
