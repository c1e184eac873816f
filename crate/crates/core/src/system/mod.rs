//! The system side of the conversation: belief tracking, summary states,
//! learned and scripted dialogue managers, and rewards.

pub mod agent;
pub mod belief;
pub mod learner;
pub mod reward;
pub mod summary;

pub use agent::{select_system_action, Decision, DialogueSystem, PolicySystem, ScriptedSystem};
pub use belief::{observe_system, replay_belief, update_belief, BeliefState};
pub use learner::{GpSarsa, Learner, LearnerKind, PolicyLearner, SarsaLambda, Step};
pub use reward::{compute_reward, MAX_TURNS, SUCCESS_REWARD, TURN_PENALTY};
pub use summary::{action_mask, master_to_acts, MasterAction, SummaryState};
