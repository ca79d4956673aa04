"""Monte-Carlo simulator of a downlink wearable cell with MU-MIMO, NOMA and D2D underlay."""

from .allocation import PowerAllocation, grid_oracle, noma_beam_power, oma_beam_power
from .beamforming import BeamPlan, IllConditionedError, effective_gains, select_clusters, zf_precoder
from .channel import ChannelState, path_loss_db, sample_channels
from .harness import AggregateReport, ccdf, emit_report, load_report, run_campaign, run_drop
from .linkmetrics import DropMetrics, cwd_sinr, dwd_sinr, latency, spectral_efficiency
from .scenario import (ConfigError, ScenarioConfig, Topology, fig4_preset, load_config,
                       sample_topology, validate_config)

__version__ = "0.1.0"
