//! Dynamics of the tangent family `f(z) = λ tan z`.
//!
//! The crate is organised bottom-up:
//!
//! * [`dynamics`]: stable evaluation of the map and its derivatives, forward
//!   orbits with pole detection, and derivatives of the asymptotic orbit with
//!   respect to the parameter.
//! * [`inverse`]: inverse branches indexed by vertical strips, composed
//!   inverse maps along itineraries, and prepoles.
//! * [`cycles`]: Newton refinement of periodic cycles, multipliers, repelling
//!   cycles accumulating at prepoles, and continuation of cycles along
//!   parameter paths.
//! * [`parameter`]: classification of parameters into hyperbolic components,
//!   the eigenvalue map, internal rays, virtual centers and bud points.
//! * [`render`]: deterministic tiled rasterisation of the parameter and
//!   dynamic planes with PPM output.
//! * [`selftest`]: the embedded invariant suite used by `tandyn selftest`.
//! * [`text`]: `a+bi` literals and shortest round-trip number formatting.

pub mod cycles;
pub mod dynamics;
pub mod error;
pub mod inverse;
pub mod parameter;
pub mod render;
pub mod selftest;
pub mod text;

pub use num_complex::Complex64;

pub use cycles::{Cycle, PathSingularityKind, PathSingularityReport, Stability};
pub use dynamics::{ComplexPoint, OrbitOutcome, Parameter};
pub use error::{Error, Result};
pub use inverse::{Itinerary, Prepole};
pub use parameter::{Classification, ComponentKind, ComponentSample, RayPoint, VirtualCenter};
pub use render::{Palette, RasterImage, RenderOptions, Viewport};
pub use text::{format_complex, parse_complex};
