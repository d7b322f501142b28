//! Quantitative checks on trajectories: decay rates, volume growth, masses,
//! rescaled limits, Yamabe-type classification and evolution residuals.

pub mod fit;
pub mod limit;
pub mod mass;
pub mod report;
pub mod residual;
pub mod trajectory;

pub use fit::{fit_decay, second_ff_convergence, volume_growth, FitWindow, RateFit, SecondFormRates, VolumeGrowth};
pub use limit::{
    area_radius, by_mass_limit, hawking_mass_limit, rescaled_limit, yamabe_classify, RescaledLimit, Verdict,
    YamabeResult,
};
pub use mass::{by_mass, hawking_mass, mass_bound_check, mass_series, MassBoundReport, MassKind, MassSeries};
pub use report::{summarize, Report};
pub use residual::{by_mass_evolution_residual, by_mass_rhs, evolution_residual_h, h_evolution_rhs};
pub use trajectory::{write_csv, Sample, SampleScalars, Trajectory, CSV_HEADER};
