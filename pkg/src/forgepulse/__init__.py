"""forgepulse: commit-history analytics for developer communities.

Pipeline stages: ingest (git log -> validated records), identity (emails ->
organizational units), series (records -> monthly counts), metrics (rank
correlation, diversity index, contribution tail), growth (Gompertz/logistic
fits, phases, bi-phase detection), pipeline/cli (orchestration and reports).
"""

from .errors import (
    ConfigError,
    ForgepulseError,
    GrowthFitError,
    IdentityError,
    LogParseError,
    MetricError,
    RepoAcquisitionError,
    SeriesError,
)
from .growth import (
    BiPhaseFit,
    FitOptions,
    GrowthFit,
    GrowthModel,
    GrowthParams,
    PhaseConfig,
    PhaseLabel,
    classify_phase,
    detect_biphase,
    fit_growth,
    model_value,
    ode_rhs,
)
from .identity import (
    DomainClass,
    IdentityConfig,
    OrgUnit,
    classify_domain,
    load_identity_config,
    normalize_email,
    registrable_domain,
    resolve_org,
)
from .ingest import (
    CommitRecord,
    IngestReport,
    acquire_repo_log,
    format_record,
    parse_log_stream,
)
from .metrics import (
    DiversityResult,
    SpearmanResult,
    TailResult,
    TrendResult,
    contribution_tail,
    diversity,
    linear_trend,
    org_shares,
    spearman,
    spearman_distinct_ranks,
)
from .pipeline import (
    MetricsReport,
    ProjectSource,
    ProjectSummary,
    RunConfig,
    compute_metrics,
    load_run_config,
    run_pipeline,
    summarize,
)
from .series import (
    EligibilityThresholds,
    MonthKey,
    MonthlyPoint,
    MonthlySeries,
    build_monthly_series,
    check_eligibility,
    moving_average,
    smooth,
)

__version__ = "0.1.0"
