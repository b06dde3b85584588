//! System parameters and realized problem instances.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{ChannelParams, ChannelRealization};
use crate::compute::ComputeParams;
use crate::error::Result;
use crate::game::GameParams;
use crate::scenario::{generate_tasks, init_scenario, step_mobility, ScenarioConfig, ScenarioState, Task};

/// Every model parameter needed to realize and evaluate an instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemParams {
    pub scenario: ScenarioConfig,
    pub channel: ChannelParams,
    pub compute: ComputeParams,
    pub game: GameParams,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.channel.validate()?;
        self.compute.validate()?;
        self.game.validate()
    }

    pub fn num_vehicles(&self) -> usize {
        self.scenario.num_vehicles
    }

    pub fn num_elements(&self) -> usize {
        self.scenario.num_elements
    }
}

/// One slot of a realized instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotInstance {
    pub state: ScenarioState,
    pub tasks: Vec<Option<Task>>,
    pub channel: ChannelRealization,
}

impl SlotInstance {
    pub fn num_tasks(&self) -> usize {
        self.tasks.iter().filter(|t| t.is_some()).count()
    }
}

/// Mobility, task arrivals and channels for every slot of one seed.
///
/// Solvers only read an instance, so every policy evaluated against the same
/// instance faces identical conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub params: SystemParams,
    pub slots: Vec<SlotInstance>,
}

const TASK_STREAM: u64 = 1;
const CHANNEL_STREAM: u64 = 2;

impl Instance {
    pub fn realize(params: &SystemParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut state = init_scenario(params.scenario.clone(), seed)?;
        let mut task_rng = ChaCha8Rng::seed_from_u64(seed);
        task_rng.set_stream(TASK_STREAM);
        let mut channel_rng = ChaCha8Rng::seed_from_u64(seed);
        channel_rng.set_stream(CHANNEL_STREAM);
        let mut slots = Vec::with_capacity(params.scenario.num_slots);
        for _ in 0..params.scenario.num_slots {
            let tasks = generate_tasks(&state, &mut task_rng);
            let channel = ChannelRealization::realize(&params.channel, &state, &mut channel_rng)?;
            let next = step_mobility(&state);
            slots.push(SlotInstance { state, tasks, channel });
            state = next;
        }
        Ok(Self {
            params: params.clone(),
            slots,
        })
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn num_tasks(&self) -> usize {
        self.slots.iter().map(SlotInstance::num_tasks).sum()
    }
}
