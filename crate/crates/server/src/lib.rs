//! HTTP service over the saxnav engine: sessions hold one analyzed upload
//! each and expose its tree, cluster details, heat maps, comparisons and
//! queries as JSON.

mod api;
mod config;
mod detail;
mod error;
mod session;

pub use api::{router, serve};
pub use config::{ServiceConfig, DEFAULT_MAX_SERIES, DEFAULT_MAX_UPLOAD_BYTES};
pub use detail::{downsample, MAX_DETAIL_POINTS};
pub use error::{Result, ServiceError};
pub use session::{ClusterDetail, MemberSeries, SeriesDetail, Session, SessionStore, Upload};
