//! Sphere, oriented box and capsule primitives with exact pairwise overlap tests.
//!
//! Overlap means strict penetration: shapes that merely touch are disjoint, so
//! the free space is closed.

use nalgebra::{Isometry3, Matrix3, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum Shape<S: Real> {
    Sphere {
        center: Vector3<S>,
        radius: S,
    },
    Box {
        center: Vector3<S>,
        rotation: UnitQuaternion<S>,
        half_extents: Vector3<S>,
    },
    Capsule {
        a: Vector3<S>,
        b: Vector3<S>,
        radius: S,
    },
}

impl<S: Real> Shape<S> {
    pub fn sphere(center: Vector3<S>, radius: S) -> Self {
        Shape::Sphere { center, radius }
    }

    pub fn cuboid(
        center: Vector3<S>,
        rotation: UnitQuaternion<S>,
        half_extents: Vector3<S>,
    ) -> Self {
        Shape::Box {
            center,
            rotation,
            half_extents,
        }
    }

    pub fn capsule(a: Vector3<S>, b: Vector3<S>, radius: S) -> Self {
        Shape::Capsule { a, b, radius }
    }

    /// Checks that every radius and half extent is positive and finite.
    pub fn validate(&self, field: &str) -> Result<()> {
        let ok = |v: S| v > S::ZERO && v.is_finite_value();
        let valid = match self {
            Shape::Sphere { radius, .. } | Shape::Capsule { radius, .. } => ok(*radius),
            Shape::Box { half_extents, .. } => half_extents.iter().all(|&h| ok(h)),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::scene(
                field,
                "radii and half extents must be positive",
            ))
        }
    }

    /// Smallest radius or half extent; sets the default edge-check resolution.
    pub fn feature_size(&self) -> S {
        match self {
            Shape::Sphere { radius, .. } | Shape::Capsule { radius, .. } => *radius,
            Shape::Box { half_extents, .. } => half_extents.min(),
        }
    }

    pub fn transformed(&self, pose: &Isometry3<S>) -> Shape<S> {
        match self {
            Shape::Sphere { center, radius } => Shape::Sphere {
                center: pose.transform_vector(center) + pose.translation.vector,
                radius: *radius,
            },
            Shape::Box {
                center,
                rotation,
                half_extents,
            } => Shape::Box {
                center: pose.transform_vector(center) + pose.translation.vector,
                rotation: pose.rotation * rotation,
                half_extents: *half_extents,
            },
            Shape::Capsule { a, b, radius } => Shape::Capsule {
                a: pose.transform_vector(a) + pose.translation.vector,
                b: pose.transform_vector(b) + pose.translation.vector,
                radius: *radius,
            },
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn aabb(&self) -> (Vector3<S>, Vector3<S>) {
        match self {
            Shape::Sphere { center, radius } => {
                let r = Vector3::repeat(*radius);
                (center - r, center + r)
            }
            Shape::Capsule { a, b, radius } => {
                let r = Vector3::repeat(*radius);
                (a.inf(b) - r, a.sup(b) + r)
            }
            Shape::Box {
                center,
                rotation,
                half_extents,
            } => {
                let m: Matrix3<S> = rotation.to_rotation_matrix().into_inner().abs();
                let e = m * half_extents;
                (center - e, center + e)
            }
        }
    }

    /// Strict penetration test.
    pub fn intersects(&self, other: &Shape<S>) -> bool {
        use Shape::*;
        match (self, other) {
            (
                Sphere {
                    center: c1,
                    radius: r1,
                },
                Sphere {
                    center: c2,
                    radius: r2,
                },
            ) => {
                let r = *r1 + *r2;
                (c1 - c2).norm_squared() < r * r
            }
            (Sphere { center, radius: rs }, Capsule { a, b, radius: rc })
            | (Capsule { a, b, radius: rc }, Sphere { center, radius: rs }) => {
                let r = *rs + *rc;
                point_segment_distance_squared(center, a, b) < r * r
            }
            (
                Capsule {
                    a: a1,
                    b: b1,
                    radius: r1,
                },
                Capsule {
                    a: a2,
                    b: b2,
                    radius: r2,
                },
            ) => {
                let r = *r1 + *r2;
                segment_segment_distance_squared(a1, b1, a2, b2) < r * r
            }
            (
                Sphere { center: c, radius },
                Box {
                    center,
                    rotation,
                    half_extents,
                },
            )
            | (
                Box {
                    center,
                    rotation,
                    half_extents,
                },
                Sphere { center: c, radius },
            ) => {
                let local = rotation.inverse_transform_vector(&(c - center));
                point_box_distance_squared(&local, half_extents) < *radius * *radius
            }
            (
                Capsule { a, b, radius },
                Box {
                    center,
                    rotation,
                    half_extents,
                },
            )
            | (
                Box {
                    center,
                    rotation,
                    half_extents,
                },
                Capsule { a, b, radius },
            ) => {
                let la = rotation.inverse_transform_vector(&(a - center));
                let lb = rotation.inverse_transform_vector(&(b - center));
                segment_box_distance_squared(&la, &lb, half_extents) < *radius * *radius
            }
            (
                Box {
                    center: c1,
                    rotation: q1,
                    half_extents: h1,
                },
                Box {
                    center: c2,
                    rotation: q2,
                    half_extents: h2,
                },
            ) => boxes_overlap(c1, q1, h1, c2, q2, h2),
        }
    }
}

pub fn point_segment_distance_squared<S: Real>(
    p: &Vector3<S>,
    a: &Vector3<S>,
    b: &Vector3<S>,
) -> S {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > S::ZERO {
        ((p - a).dot(&ab) / len2).max(S::ZERO).min(S::ONE)
    } else {
        S::ZERO
    };
    (a + ab * t - p).norm_squared()
}

/// Closest distance between segments `p1q1` and `p2q2`, squared.
pub fn segment_segment_distance_squared<S: Real>(
    p1: &Vector3<S>,
    q1: &Vector3<S>,
    p2: &Vector3<S>,
    q2: &Vector3<S>,
) -> S {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let tiny = S::lit(1e-30);
    let clamp = |x: S| x.max(S::ZERO).min(S::ONE);

    let (s, t) = if a <= tiny && e <= tiny {
        (S::ZERO, S::ZERO)
    } else if a <= tiny {
        (S::ZERO, clamp(f / e))
    } else {
        let c = d1.dot(&r);
        if e <= tiny {
            (clamp(-c / a), S::ZERO)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > tiny {
                clamp((b * f - c * e) / denom)
            } else {
                S::ZERO
            };
            let mut t = (b * s + f) / e;
            if t < S::ZERO {
                t = S::ZERO;
                s = clamp(-c / a);
            } else if t > S::ONE {
                t = S::ONE;
                s = clamp((b - c) / a);
            }
            (s, t)
        }
    };
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm_squared()
}

/// Distance from a point (in box coordinates) to an axis-aligned box, squared.
pub fn point_box_distance_squared<S: Real>(p: &Vector3<S>, half: &Vector3<S>) -> S {
    (0..3).fold(S::ZERO, |acc, i| {
        let excess = (p[i].abs() - half[i]).max(S::ZERO);
        acc + excess * excess
    })
}

/// Distance from segment `ab` (in box coordinates) to an axis-aligned box, squared.
///
/// The squared distance along the segment is convex and piecewise quadratic
/// with breakpoints where the segment crosses a slab face; each piece is
/// minimized in closed form.
pub fn segment_box_distance_squared<S: Real>(
    a: &Vector3<S>,
    b: &Vector3<S>,
    half: &Vector3<S>,
) -> S {
    let d = b - a;
    let mut breaks: Vec<S> = vec![S::ZERO, S::ONE];
    for i in 0..3 {
        if d[i] != S::ZERO {
            for face in [half[i], -half[i]] {
                let t = (face - a[i]) / d[i];
                if t > S::ZERO && t < S::ONE {
                    breaks.push(t);
                }
            }
        }
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));

    let eval = |t: S| point_box_distance_squared(&(a + d * t), half);
    let mut best = eval(S::ZERO).min(eval(S::ONE));
    for w in breaks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        let mid = a + d * ((t0 + t1) * S::HALF);
        // On this piece each clamped axis contributes (a_i + t d_i - face_i)^2.
        let (mut qa, mut qb) = (S::ZERO, S::ZERO);
        for i in 0..3 {
            if mid[i] > half[i] || mid[i] < -half[i] {
                let face = if mid[i] > half[i] { half[i] } else { -half[i] };
                let off = a[i] - face;
                qa += d[i] * d[i];
                qb += S::lit(2.0) * off * d[i];
            }
        }
        if qa > S::ZERO {
            let t = (-qb / (S::lit(2.0) * qa)).max(t0).min(t1);
            best = best.min(eval(t));
        }
        best = best.min(eval(t0)).min(eval(t1));
    }
    best
}

/// Separating-axis test for two oriented boxes; touching boxes do not overlap.
fn boxes_overlap<S: Real>(
    c1: &Vector3<S>,
    q1: &UnitQuaternion<S>,
    h1: &Vector3<S>,
    c2: &Vector3<S>,
    q2: &UnitQuaternion<S>,
    h2: &Vector3<S>,
) -> bool {
    let m1 = q1.to_rotation_matrix().into_inner();
    let m2 = q2.to_rotation_matrix().into_inner();
    let axes1 = [
        m1.column(0).into_owned(),
        m1.column(1).into_owned(),
        m1.column(2).into_owned(),
    ];
    let axes2 = [
        m2.column(0).into_owned(),
        m2.column(1).into_owned(),
        m2.column(2).into_owned(),
    ];
    let t = c2 - c1;

    let separated = |axis: &Vector3<S>| -> bool {
        let ra = (0..3).fold(S::ZERO, |acc, i| acc + h1[i] * axes1[i].dot(axis).abs());
        let rb = (0..3).fold(S::ZERO, |acc, i| acc + h2[i] * axes2[i].dot(axis).abs());
        t.dot(axis).abs() >= ra + rb
    };

    for axis in axes1.iter().chain(axes2.iter()) {
        if separated(axis) {
            return false;
        }
    }
    for u in &axes1 {
        for v in &axes2 {
            let axis = u.cross(v);
            if axis.norm_squared() > S::lit(1e-12) && separated(&axis) {
                return false;
            }
        }
    }
    true
}
