/// Warmup layout: an initial step-size-only phase (15%), a middle phase
/// (60%) of doubling mass-estimation windows, and a final step-size phase
/// (25%) with the mass frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmupSchedule {
    pub n_warmup: usize,
    pub initial_end: usize,
    pub final_start: usize,
    /// Exclusive end of each mass window; the last equals `final_start`.
    pub window_ends: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initial,
    MassWindow(usize),
    Final,
}

impl WarmupSchedule {
    pub fn new(n_warmup: usize) -> Self {
        Self::with_fractions(n_warmup, 0.15, 0.25)
    }

    /// Custom initial and final fractions; the middle gets the rest.
    pub fn with_fractions(n_warmup: usize, initial: f64, last: f64) -> Self {
        let initial = initial.clamp(0.0, 1.0);
        let last = last.clamp(0.0, 1.0 - initial);
        let initial_end = (n_warmup as f64 * initial).floor() as usize;
        let final_start = n_warmup - (n_warmup as f64 * last).floor() as usize;
        let middle = final_start - initial_end;
        let mut window_ends = Vec::new();
        if middle >= 20 {
            let base = (middle / 7).max(1);
            let mut start = initial_end;
            let mut len = base;
            while start + len < final_start {
                // A window that would leave less than its own length behind
                // absorbs the remainder.
                if start + 3 * len > final_start {
                    break;
                }
                window_ends.push(start + len);
                start += len;
                len *= 2;
            }
            window_ends.push(final_start);
        } else if middle > 0 {
            window_ends.push(final_start);
        }
        WarmupSchedule {
            n_warmup,
            initial_end,
            final_start,
            window_ends,
        }
    }

    pub fn phase(&self, iteration: usize) -> Phase {
        if iteration < self.initial_end {
            Phase::Initial
        } else if iteration >= self.final_start {
            Phase::Final
        } else {
            let w = self.window_ends.iter().position(|e| iteration < *e).unwrap_or(0);
            Phase::MassWindow(w)
        }
    }

    /// Start of the window containing `iteration`.
    pub fn window_start(&self, window: usize) -> usize {
        if window == 0 {
            self.initial_end
        } else {
            self.window_ends[window - 1]
        }
    }

    pub fn is_window_end(&self, iteration: usize) -> bool {
        self.window_ends.contains(&(iteration + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousand_iteration_layout() {
        let s = WarmupSchedule::new(1000);
        assert_eq!(s.initial_end, 150);
        assert_eq!(s.final_start, 750);
        assert_eq!(s.window_ends, vec![235, 405, 750]);
        assert_eq!(s.phase(0), Phase::Initial);
        assert_eq!(s.phase(200), Phase::MassWindow(0));
        assert_eq!(s.phase(749), Phase::MassWindow(2));
        assert_eq!(s.phase(750), Phase::Final);
        assert!(s.is_window_end(234));
    }

    #[test]
    fn windows_cover_middle_exactly() {
        for n in [0, 10, 50, 133, 500, 2000, 12345] {
            let s = WarmupSchedule::new(n);
            let mut prev = s.initial_end;
            for e in &s.window_ends {
                assert!(*e > prev);
                prev = *e;
            }
            if !s.window_ends.is_empty() {
                assert_eq!(prev, s.final_start);
            }
        }
    }
}
