use std::fmt::Display;

use thiserror::Error;

use crate::model::{CustomerId, HopperId, OrderId, TruckId};

/// Instance validation failure. Every variant names the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("{path}: duplicate id {id}")]
    DuplicateId { path: String, id: String },

    #[error("{path}: unknown {kind} {id}")]
    UnknownReference { path: String, kind: &'static str, id: String },

    #[error("{path}: order {order} has non-positive quantity {value}")]
    NonPositiveQuantity { path: String, order: OrderId, value: f64 },

    #[error("{path}: matrix is {found}x{found}, expected {expected}x{expected}")]
    MatrixShape { path: String, expected: usize, found: usize },

    #[error("{path}: invalid matrix entry {value}")]
    MatrixEntry { path: String, value: f64 },

    #[error("{path}: missing matrix entry")]
    MissingMatrixEntry { path: String },

    #[error("cost.rate_bands: {0}")]
    RateBands(String),

    #[error("cost.shortfall_penalty: {value} does not exceed the lower bound {bound}")]
    ShortfallPenaltyTooLow { value: f64, bound: f64 },

    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ValidationError {
    pub(crate) fn duplicate(path: impl Into<String>, id: impl Display) -> Self {
        Self::DuplicateId { path: path.into(), id: id.to_string() }
    }

    pub(crate) fn unknown(path: impl Into<String>, kind: &'static str, id: impl Display) -> Self {
        Self::UnknownReference { path: path.into(), kind, id: id.to_string() }
    }

    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid { path: path.into(), message: message.into() }
    }
}

/// A plan refers to something the instance does not define.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("day {day}: unknown truck {truck}")]
    UnknownTruck { day: u32, truck: TruckId },
    #[error("day {day}, truck {truck}: unknown customer {customer}")]
    UnknownCustomer { day: u32, truck: TruckId, customer: CustomerId },
    #[error("day {day}, truck {truck}: unknown order {order}")]
    UnknownOrder { day: u32, truck: TruckId, order: OrderId },
    #[error("day {day}, truck {truck}: truck has no hopper {hopper}")]
    UnknownHopper { day: u32, truck: TruckId, hopper: HopperId },
}
