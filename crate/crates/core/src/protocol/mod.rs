//! Networked teacher/apprentice dialogue.

pub mod memory;
pub mod session;
pub mod wire;

pub use memory::{duplex, MemoryStream};
pub use session::{
    apprentice_session, connect_apprentice, serve_teacher, teacher_session, ApprenticeReport,
    TeacherReport,
};
pub use wire::{
    decode_frame, decode_message, encode_message, read_message, write_message, FrameError,
    WireMessage,
};
