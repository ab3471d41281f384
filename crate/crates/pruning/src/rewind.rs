/// When to capture the weights a winning ticket is reset to.
///
/// `point = 0` with either unit reproduces the original scheme of resetting
/// to the initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewindPolicy {
    pub point: usize,
    pub unit: RewindUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewindUnit {
    Epochs,
    Updates,
}

impl RewindPolicy {
    pub fn at_initialization() -> Self {
        RewindPolicy {
            point: 0,
            unit: RewindUnit::Epochs,
        }
    }

    pub fn is_initialization(&self) -> bool {
        self.point == 0
    }

    pub fn unit_name(&self) -> &'static str {
        match self.unit {
            RewindUnit::Epochs => "epochs",
            RewindUnit::Updates => "updates",
        }
    }
}
