//! Shipped chart fixtures and their expected class flags.

use serde::Serialize;

use crate::manifold::{load_spec, ManifoldSpec};
use crate::pconnection::ClassFlags;

/// Where an expected flag comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Derived by hand from the closed form of `g` and `P`.
    Analytic,
    /// Recorded from a harness run and cross-checked against the looped oracles.
    Computed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Expectation {
    pub value: bool,
    pub provenance: Provenance,
}

const fn a(value: bool) -> Expectation {
    Expectation {
        value,
        provenance: Provenance::Analytic,
    }
}

const fn c(value: bool) -> Expectation {
    Expectation {
        value,
        provenance: Provenance::Computed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpectedFlags {
    #[serde(rename = "W0")]
    pub w0: Expectation,
    #[serde(rename = "W3")]
    pub w3: Expectation,
    #[serde(rename = "L1")]
    pub l1: Expectation,
    #[serde(rename = "L2")]
    pub l2: Expectation,
}

impl ExpectedFlags {
    /// Names of the flags that disagree with `got`.
    pub fn mismatches(&self, got: &ClassFlags) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, want, have) in [
            ("W0", self.w0.value, got.w0.flag),
            ("W3", self.w3.value, got.w3.flag),
            ("L1", self.l1.value, got.l1.flag),
            ("L2", self.l2.value, got.l2.flag),
        ] {
            if want != have {
                out.push(name);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
    /// One entry per sample point.
    pub expected: &'static [ExpectedFlags],
}

impl Fixture {
    pub fn spec(&self) -> ManifoldSpec {
        load_spec(self.source).expect("shipped fixtures parse")
    }
}

const fn flags(w0: Expectation, w3: Expectation, l1: Expectation, l2: Expectation) -> ExpectedFlags {
    ExpectedFlags { w0, w3, l1, l2 }
}

// ∇P = 0 and R = 0.
const FLAT: ExpectedFlags = flags(a(true), a(true), a(true), a(true));
// R = 0; σF(e1,e1,e2) = 2cos x1 and σF(e1,e1,e1) = -3 sin x1 never vanish together.
const ROTATING: ExpectedFlags = flags(a(false), a(false), a(true), a(true));
// The (e1,e3) sectional curvature is nonzero and R(e1,e3,Pe3,Pe1) = -R(e1,e3,e3,e1).
const WARPED: ExpectedFlags = flags(a(false), c(false), a(false), c(true));
// (∇_2 P)^1_2 = 2 sin x1 cos x1, σF(e2,e2,e1) = 4 sin x1 cos x1; in dimension 2
// every cyclic sum of a tensor skew in its first pair vanishes; R(x,y,Pz,Pw) = -R.
const SPHERE_PATCH: ExpectedFlags = flags(a(false), a(false), a(false), a(true));
// At the origin ∂g = 0, so Γ = 0 and the constant P has F = 0 there; not elsewhere.
const SPHERE_STEREO_ORIGIN: ExpectedFlags = flags(a(true), a(true), a(false), a(true));
const SPHERE_STEREO: ExpectedFlags = flags(c(false), c(false), a(false), a(true));
// Riemannian product with its product structure: ∇P = 0 and R is block diagonal.
const SPHERE_PRODUCT: ExpectedFlags = flags(a(true), a(true), a(true), a(true));
const S3_LINE: ExpectedFlags = flags(a(false), c(true), c(false), c(true));

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "flat-product",
        source: include_str!("../../fixtures/flat-product.json"),
        expected: &[FLAT; 3],
    },
    Fixture {
        name: "rotating-2d",
        source: include_str!("../../fixtures/rotating-2d.json"),
        expected: &[ROTATING; 3],
    },
    Fixture {
        name: "rotating-4d",
        source: include_str!("../../fixtures/rotating-4d.json"),
        expected: &[ROTATING; 3],
    },
    Fixture {
        name: "warped",
        source: include_str!("../../fixtures/warped.json"),
        expected: &[WARPED; 3],
    },
    Fixture {
        name: "sphere-patch",
        source: include_str!("../../fixtures/sphere-patch.json"),
        expected: &[SPHERE_PATCH; 3],
    },
    Fixture {
        name: "sphere-stereographic",
        source: include_str!("../../fixtures/sphere-stereographic.json"),
        expected: &[SPHERE_STEREO_ORIGIN, SPHERE_STEREO, SPHERE_STEREO],
    },
    Fixture {
        name: "sphere-product",
        source: include_str!("../../fixtures/sphere-product.json"),
        expected: &[SPHERE_PRODUCT; 3],
    },
    Fixture {
        name: "s3-line",
        source: include_str!("../../fixtures/s3-line.json"),
        expected: &[S3_LINE; 3],
    },
];

pub fn by_name(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}
