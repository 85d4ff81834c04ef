pub mod analysis;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod montage;
pub mod paradigm;
pub mod pipeline;
pub mod seed;
pub mod smarthome;
pub mod stream;
pub mod synth;
pub mod timing;
pub mod trial;

pub use error::{Error, Result};
pub use montage::{Montage, Region, N_CHANNELS};
pub use paradigm::{generate_schedule, timeline, FlashSchedule, StimulusTimeline};
pub use stream::Stream;
pub use synth::{default_profile, render_stream, SubjectProfile, TrialSpec};
pub use timing::TimingConfig;
pub use trial::{Condition, Epoch, EpochMeta, ObjectId, Trial};
