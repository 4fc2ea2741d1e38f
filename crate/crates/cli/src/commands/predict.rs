use ionjump_core::interaction::{overlap_flux, predicted_jump_rate, resonant_flux, FluxModel};

use super::Context;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::report::Report;

/// Factor-chain estimate of the unfiltered-arm jump rate at the reference
/// temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Photons/s within the absorption window.
    pub flux: f64,
    pub factors: [(&'static str, f64); 5],
    pub factor_product: f64,
    /// Events/s.
    pub rate_per_s: f64,
}

impl Prediction {
    pub fn from_config(config: &ExperimentConfig) -> Result<Self, CliError> {
        let spdc = &config.spdc;
        let c = &config.coupling;
        let density = spdc.spectral_flux_density(0.0, spdc.ref_temperature_c);
        let flux = match c.flux_model {
            FluxModel::Rectangular => resonant_flux(density, c.flux_window_mhz)?,
            FluxModel::Overlap => overlap_flux(spdc, &c.window(), spdc.ref_temperature_c),
        };
        Ok(Self {
            flux,
            factors: c.factors.named(),
            factor_product: c.factors.product(),
            rate_per_s: predicted_jump_rate(flux, &c.factors)?,
        })
    }

    pub fn report(&self, config: &ExperimentConfig) -> Report {
        let mut r = Report::new(config.digest());
        r.num("flux_density_per_s_mhz", config.spdc.spectral_flux_density(0.0, config.spdc.ref_temperature_c))
            .num("flux_window_mhz", config.coupling.flux_window_mhz)
            .text("flux_model", config.coupling.flux_model.name())
            .num("flux_per_s", self.flux);
        for (name, v) in self.factors {
            r.num(format!("factor.{name}"), v);
        }
        r.num("factor_product", self.factor_product)
            .num("rate_per_s", self.rate_per_s)
            .num("rate_per_min", 60.0 * self.rate_per_s)
            .num("seconds_per_jump", 1.0 / self.rate_per_s);
        r
    }
}

/// Prints the factor chain and writes `predict.txt`.
pub fn predict(ctx: &Context) -> Result<Prediction, CliError> {
    let p = Prediction::from_config(&ctx.config)?;
    let report = p.report(&ctx.config);
    print!("{}", report.render());
    ctx.write_resolved_config()?;
    report.write(&ctx.output("predict.txt")?)?;
    Ok(p)
}
