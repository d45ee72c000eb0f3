use rand::rngs::StdRng;
use rand::SeedableRng;

use nsx_core::oracles::DomainSpec;

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Global settings. Bounds given on the command line override the ones a
/// script or result carries; unset bounds leave them alone.
#[derive(Clone, Debug)]
pub struct Config {
    pub fuel: Option<u64>,
    pub denom: Option<u64>,
    pub depth: Option<u64>,
    pub json: bool,
    pub trace: bool,
    pub seed: u64,
}

impl Config {
    pub fn from_flags(
        fuel: Option<u64>,
        denom: Option<u64>,
        depth: Option<u64>,
        json: bool,
        trace: bool,
        seed: Option<u64>,
    ) -> Result<Config, String> {
        for (flag, v) in [("--fuel", fuel), ("--denom", denom), ("--depth", depth)] {
            if v == Some(0) {
                return Err(format!("{flag} must be positive"));
            }
        }
        Ok(Config {
            fuel,
            denom,
            depth,
            json,
            trace,
            seed: seed.unwrap_or(DEFAULT_SEED),
        })
    }

    /// `extra` items plus the bound flags as domain settings.
    pub fn domain(&self, extra: &[String]) -> Result<DomainSpec, String> {
        let mut items: Vec<String> = extra.to_vec();
        if let Some(f) = self.fuel {
            items.push(format!("fuel={f}"));
        }
        if let Some(d) = self.denom {
            items.push(format!("denom={d}"));
        }
        if let Some(d) = self.depth {
            items.push(format!("tree={d}"));
        }
        DomainSpec::parse(&items)
    }

    pub fn rng(&self) -> StdRng {
        StdRng::seed_from_u64(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nsx_core::kernel::DEFAULT_FUEL;

    #[test]
    fn zero_bounds_rejected() {
        assert!(Config::from_flags(Some(0), None, None, false, false, None).is_err());
        assert!(Config::from_flags(None, None, Some(0), false, false, None).is_err());
    }

    #[test]
    fn flags_become_settings() {
        let c = Config::from_flags(Some(500), Some(64), Some(3), false, false, None).unwrap();
        let d = c.domain(&["k=1..4".into()]).unwrap();
        assert_eq!(d.setting("fuel", DEFAULT_FUEL), 500);
        assert_eq!(d.setting("tree", 0), 3);
        assert_eq!(d.bound_vars(), vec!["k"]);
    }
}
