"""Statistical channel model for the 6-15 GHz (FR3) bands.

Parameter registry, path loss, correlated large-scale parameters, power
angular delay profile synthesis, estimators and the end-to-end pipeline.
"""
from .errors import (DegenerateFit, DegenerateInput, DomainError, EmptyResult, Fr3ChanError,
                     MissingData, SuspectDataWarning, Unattainable)
from .registry import (Band, CrossCorrMatrix, LinkClass, LinkClassParams, LogNormalStat,
                       PathLossParams, Registry, Scenario, Visibility, load_embedded, lookup,
                       validate)
from .pathloss import LinkBudget, fspl, max_range, path_loss, received_power
from .lsp import SpatialModel, draw_lsp, draw_route_lsp, nearest_psd
from .padp import Padp, Tap, synth_padp
from .estimators import (angular_spread, coherence_bw, corr_matrix, fit_lognormal, fit_path_loss,
                         mean_delay, rms_delay_spread, threshold_taps)
from .pipeline import (MeasurementRecord, ScenarioReport, bin_records, coverage_grid,
                       extract_report, roundtrip, simulate_route)

__version__ = "0.1.0"
