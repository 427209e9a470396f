use std::cell::Cell;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// A wall-clock deadline polled from long-running loops.
#[derive(Debug, Clone, Default)]
pub struct Deadline {
    at: Option<Instant>,
    ticks: Cell<u32>,
}

impl Deadline {
    pub fn none() -> Self {
        Deadline::default()
    }

    pub fn after(d: Duration) -> Self {
        Deadline {
            at: Some(Instant::now() + d),
            ticks: Cell::new(0),
        }
    }

    pub fn at(at: Option<Instant>) -> Self {
        Deadline {
            at,
            ticks: Cell::new(0),
        }
    }

    pub fn instant(&self) -> Option<Instant> {
        self.at
    }

    pub fn check(&self) -> Result<()> {
        match self.at {
            Some(at) if Instant::now() >= at => Err(Error::Timeout),
            _ => Ok(()),
        }
    }

    /// Cheap variant for hot loops: only reads the clock every 1024 calls.
    #[inline]
    pub fn tick(&self) -> Result<()> {
        if self.at.is_none() {
            return Ok(());
        }
        let n = self.ticks.get().wrapping_add(1);
        self.ticks.set(n);
        if n.is_multiple_of(1024) {
            self.check()
        } else {
            Ok(())
        }
    }
}
