"""coopmimo: outage simulation and statistical precoding for two-hop MIMO links.

A source with per-stream precoding talks to a destination both directly and
through a half-duplex relay that decodes what it can and forwards a single
stream.  The library estimates per-stream and average outage probabilities
by Monte Carlo, designs correlation-equalizing precoders from channel
statistics alone, and compares the partial-forwarding protocol against
decode-and-forward, amplify-and-forward, and direct transmission.
"""

from .channel import (
    ChannelRealization,
    LinkCorrelation,
    Topology,
    exp_correlation,
    path_loss_db,
    path_loss_linear,
    realization_rng,
    sample_channel,
    sample_realization,
)
from .config import ConfigError, SimConfig, load_config, parse_config, serialize_config
from .outage import OutageEstimate, SweepRow, estimate_outage, n0_for_snr, sweep_snr
from .precoder import (
    EVEN_SPLIT,
    PowerSplit,
    PrecoderPair,
    StreamSplit,
    master_power_split,
    nonadaptive_pair,
    optimize_rho,
    relay_precoder,
    source_precoder,
    statistical_pair,
)
from .protocol import (
    PdfCase,
    ProtocolKind,
    SerModel,
    StreamGains,
    af_outage_indicators,
    classify_pdf_case,
    df_outage_indicators,
    effective_gains,
    mi_stream1_sr,
    mi_stream2_sr,
    no_relay_outage_indicators,
    pdf_nonorthogonal_outage_indicators,
    pdf_outage_indicators,
    ser_from_sinr,
)
from .report import (
    CSV_HEADER,
    GainEntry,
    gain_over_baseline,
    render_figures,
    snr_at_target,
    summary_table,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "ChannelRealization",
    "ConfigError",
    "EVEN_SPLIT",
    "GainEntry",
    "LinkCorrelation",
    "OutageEstimate",
    "PdfCase",
    "PowerSplit",
    "PrecoderPair",
    "ProtocolKind",
    "SerModel",
    "SimConfig",
    "StreamGains",
    "StreamSplit",
    "SweepRow",
    "Topology",
    "af_outage_indicators",
    "classify_pdf_case",
    "df_outage_indicators",
    "effective_gains",
    "estimate_outage",
    "exp_correlation",
    "gain_over_baseline",
    "load_config",
    "master_power_split",
    "mi_stream1_sr",
    "mi_stream2_sr",
    "n0_for_snr",
    "no_relay_outage_indicators",
    "nonadaptive_pair",
    "optimize_rho",
    "parse_config",
    "path_loss_db",
    "path_loss_linear",
    "pdf_nonorthogonal_outage_indicators",
    "pdf_outage_indicators",
    "realization_rng",
    "relay_precoder",
    "render_figures",
    "sample_channel",
    "sample_realization",
    "ser_from_sinr",
    "serialize_config",
    "snr_at_target",
    "source_precoder",
    "statistical_pair",
    "summary_table",
    "sweep_snr",
    "write_csv",
]
