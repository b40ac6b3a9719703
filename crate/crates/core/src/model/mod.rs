//! Shared domain types, the robot/world configuration and its file format.

mod camera;
mod config;
mod pose;
mod world;

pub use camera::CameraModel;
pub use config::{load_config, ApproachSettings, ArmGeometry, Config, RobotConfig, TaskParams, VelocityScalingLimits};
pub use pose::{normalize_angle, Pose2D, Pose3D};
pub use world::{validate_world, CatalogObject, Furniture, ObjectShape, WorldModel};
