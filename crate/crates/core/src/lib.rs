pub mod car;
pub mod distribution;
pub mod integrate;
pub mod jet;
pub mod lie_sphere;
pub mod linalg;
pub mod ode;
pub mod sample;
pub mod sp2r;
pub mod symmetry;
pub mod twistor;
