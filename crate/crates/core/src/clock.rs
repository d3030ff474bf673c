//! Budget clocks for planner runs.
//!
//! The default clock measures time in work units (distance evaluations and
//! configuration checks) converted at a fixed rate, so a seeded run consumes the
//! same budget and yields the same result on any machine. The wall clock is
//! available for interactive use.

use std::time::Instant;

/// Work units that make up one budget second on the work clock. One unit is
/// roughly one metric evaluation (about 15 ns single-threaded on the machine the
/// rate was calibrated on).
pub const WORK_UNITS_PER_SECOND: f64 = 6.5e7;

/// Work units charged for one configuration check, before shape-pair tests.
pub const STATE_CHECK_BASE_UNITS: u64 = 8;

/// Object-obstacle shape pairs (bounding-box test plus the occasional exact
/// test) that cost one work unit.
pub const PAIRS_PER_UNIT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClockMode {
    Work { units_per_second: f64 },
    Wall,
}

impl Default for ClockMode {
    fn default() -> Self {
        ClockMode::Work {
            units_per_second: WORK_UNITS_PER_SECOND,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Clock {
    mode: ClockMode,
    units: u64,
    started: Instant,
}

impl Clock {
    pub fn new(mode: ClockMode) -> Self {
        Clock {
            mode,
            units: 0,
            started: Instant::now(),
        }
    }

    pub fn charge(&mut self, units: u64) {
        self.units = self.units.saturating_add(units);
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    /// Budget seconds consumed so far.
    pub fn elapsed(&self) -> f64 {
        match self.mode {
            ClockMode::Work { units_per_second } => self.units as f64 / units_per_second,
            ClockMode::Wall => self.started.elapsed().as_secs_f64(),
        }
    }
}
