use super::{Frame, HdMapDocument, MapGenError};
use crate::geom::{cumulative_length, Scalar};
use crate::terrain::fill_missing;
use crate::{Dem, Point2, Point3};

/// Centered moving average; windows are truncated at both ends.
pub fn smooth_profile<T: Scalar>(z: &[T], window: usize) -> Vec<T> {
    let half = window / 2;
    (0..z.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(z.len() - 1);
            let sum = z[lo..=hi].iter().fold(T::zero(), |a, b| a + *b);
            sum / T::from_usize(hi - lo + 1).unwrap()
        })
        .collect()
}

/// Forward then backward pass limiting `|z[i+1] - z[i]|` to `max_grade * ds[i]`,
/// where `ds[i]` is the horizontal distance between vertices `i` and `i + 1`.
pub fn clamp_grade<T: Scalar>(z: &mut [T], ds: &[T], max_grade: T) {
    for i in 0..z.len().saturating_sub(1) {
        let lim = max_grade * ds[i];
        let d = z[i + 1] - z[i];
        if d > lim {
            z[i + 1] = z[i] + lim;
        } else if d < -lim {
            z[i + 1] = z[i] - lim;
        }
    }
    for i in (1..z.len()).rev() {
        let lim = max_grade * ds[i - 1];
        let d = z[i - 1] - z[i];
        if d > lim {
            z[i - 1] = z[i] + lim;
        } else if d < -lim {
            z[i - 1] = z[i] - lim;
        }
    }
}

/// Samples, fills, smooths and grade-clamps the elevation of every lane
/// centerline and every boundary, each polyline independently.
pub fn apply_elevation(map: &mut HdMapDocument, dem: &Dem, smooth_window: usize, max_grade: f64) -> Result<(), MapGenError> {
    let off = map.origin_offset;
    let to_global = |p: &Point3| -> Point2 {
        match map.metadata.frame {
            Frame::Local => off.to_global(p.xy()),
            Frame::Global => p.xy(),
        }
    };
    let sample_all = |pts: &[Point3]| -> Vec<Option<f64>> {
        pts.iter()
            .map(|p| {
                let g = to_global(p);
                dem.sample(g.x, g.y)
            })
            .collect()
    };
    let lane_samples: Vec<_> = map.lanes.iter().map(|l| sample_all(&l.centerline)).collect();
    let bound_samples: Vec<_> = map.boundaries.iter().map(|b| sample_all(&b.points)).collect();
    let any_valid = lane_samples.iter().chain(&bound_samples).flatten().any(Option::is_some);
    let any_vertex = lane_samples.iter().chain(&bound_samples).any(|s| !s.is_empty());
    if any_vertex && !any_valid {
        return Err(MapGenError::OutsideDem);
    }

    let mut warnings = Vec::new();
    let mut process = |what: String, pts: &mut [Point3], samples: Vec<Option<f64>>| {
        let xy: Vec<Point2> = pts.iter().map(|p| p.xy()).collect();
        let stations = cumulative_length(&xy);
        let ds: Vec<f64> = stations.windows(2).map(|w| w[1] - w[0]).collect();
        let filled = fill_missing(&stations.iter().copied().zip(samples).collect::<Vec<_>>());
        if filled.all_missing {
            warnings.push(format!("{what}: outside the DEM, elevation set to 0"));
        }
        let z: Vec<f64> = filled.samples.iter().map(|s| s.1).collect();
        let mut z = smooth_profile(&z, smooth_window);
        clamp_grade(&mut z, &ds, max_grade);
        for (p, z) in pts.iter_mut().zip(z) {
            p.z = z;
        }
    };
    for (lane, s) in map.lanes.iter_mut().zip(lane_samples) {
        process(format!("lane {}", lane.id), &mut lane.centerline, s);
    }
    for (b, s) in map.boundaries.iter_mut().zip(bound_samples) {
        process(format!("boundary {}", b.id), &mut b.points, s);
    }
    map.metadata.warnings.extend(warnings);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_step_clamp() {
        let mut z = vec![0.0, 10.0];
        clamp_grade(&mut z, &[10.0], 0.12);
        assert_eq!(z, vec![0.0, 1.2]);
        assert_eq!(smooth_profile(&[0.0, 10.0], 1), vec![0.0, 10.0]);
    }

    #[test]
    fn constant_profile_is_untouched() {
        let z = vec![50.0; 9];
        let mut s = smooth_profile(&z, 5);
        clamp_grade(&mut s, &[1.0; 8], 0.12);
        assert_eq!(s, z);
    }

    #[test]
    fn truncated_windows() {
        assert_eq!(smooth_profile(&[0.0, 3.0, 6.0, 9.0], 3), vec![1.5, 3.0, 6.0, 7.5]);
    }

    proptest! {
        #[test]
        fn grade_bound_holds(z in prop::collection::vec(-50.0..50.0f64, 2..40),
                             ds in prop::collection::vec(0.1..5.0f64, 40),
                             g in 0.01..0.3f64) {
            let mut z = z;
            let ds = &ds[..z.len() - 1];
            clamp_grade(&mut z, ds, g);
            for i in 0..ds.len() {
                prop_assert!((z[i + 1] - z[i]).abs() <= g * ds[i] + 1e-9);
            }
        }
    }
}
