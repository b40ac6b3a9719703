use std::f64::consts::{FRAC_PI_2, PI};

use fetchsim_core::model::{CameraModel, CatalogObject, Config, ObjectShape, Pose2D, Pose3D, WorldModel};
use fetchsim_core::perception::{
    convex_hull, detect_objects_2d_sim, estimate_box, euclidean_cluster, extract_roi_points, extrude_box, filter_range,
    fit_min_area_rect, project_to_plane, segment_floor_plane, PerceptionParams, Plane, PointCloud, Rect2D, Roi2D,
};
use fetchsim_core::sim::{synthesize_cloud, NoiseModel};
use fetchsim_core::Error;
use nalgebra::{Rotation2, UnitQuaternion, Vector2, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut i = i;
    while parent[i] != r {
        let next = parent[i];
        parent[i] = r;
        i = next;
    }
    r
}

// O(n^2) union-find over all pairs; components as sorted index lists,
// ordered by descending size then first index.
fn union_find_components(pts: &[Vector3<f64>], tol: f64, min_size: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..pts.len()).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if (pts[i] - pts[j]).norm_squared() <= tol * tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; pts.len()];
    for i in 0..pts.len() {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups.retain(|g| g.len() >= min_size);
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    groups
}

fn cluster_indices(pts: &[Vector3<f64>], clusters: &[PointCloud]) -> Vec<Vec<usize>> {
    clusters
        .iter()
        .map(|c| {
            c.iter()
                .map(|p| pts.iter().position(|q| q == p).expect("cluster point comes from input"))
                .collect()
        })
        .collect()
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|_| {
            Vector3::new(
                rng.random_range(0.0..extent),
                rng.random_range(0.0..extent),
                rng.random_range(0.0..extent * 0.2),
            )
        })
        .collect()
}

#[test]
fn clustering_matches_union_find_on_random_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let pts = random_cloud(&mut rng, 200, 1.0);
        let tol = 0.05 + 0.005 * trial as f64;
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let got = cluster_indices(&pts, &euclidean_cluster(&cloud, tol, 1));
        assert_eq!(got, union_find_components(&pts, tol, 1), "trial {trial}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clustering_matches_union_find(
        raw in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..0.3f64), 1..300),
        tol in 0.01..0.2f64,
        min_size in 1usize..5,
    ) {
        let pts: Vec<_> = raw.iter().map(|&(x, y, z)| Vector3::new(x, y, z)).collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let got = cluster_indices(&pts, &euclidean_cluster(&cloud, tol, min_size));
        prop_assert_eq!(got, union_find_components(&pts, tol, min_size));
    }

    #[test]
    fn range_filter_is_a_bounded_subset(
        raw in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 0..200),
        max_range in 0.1..4.0f64,
    ) {
        let pts: Vec<_> = raw.iter().map(|&(x, y, z)| Vector3::new(x, y, z)).collect();
        let kept = filter_range(&PointCloud::new(pts.clone()).unwrap(), max_range);
        prop_assert!(kept.iter().all(|p| p.norm() <= max_range && pts.contains(p)));
        let expected = pts.iter().filter(|p| p.norm() <= max_range).count();
        prop_assert_eq!(kept.len(), expected);
    }

    #[test]
    fn plane_segmentation_partitions_the_input(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -0.05..0.05f64), 3..200),
        seed in any::<u64>(),
    ) {
        let pts: Vec<_> = raw.iter().map(|&(x, y, z)| Vector3::new(x, y, z)).collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let params = PerceptionParams::default();
        let Ok(seg) = segment_floor_plane(&cloud, &params, seed) else { return Ok(()) };
        prop_assert_eq!(seg.inliers.len() + seg.remainder.len(), pts.len());
        prop_assert!(seg.inliers.iter().all(|p| seg.plane.signed_distance(p).abs() <= params.ransac_inlier_tol));
        prop_assert!(seg.remainder.iter().all(|p| seg.plane.signed_distance(p).abs() > params.ransac_inlier_tol));
        let mut merged: Vec<_> = seg.inliers.iter().chain(seg.remainder.iter()).copied().collect();
        let mut sorted = pts.clone();
        let key = |a: &Vector3<f64>, b: &Vector3<f64>| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z));
        merged.sort_by(key);
        sorted.sort_by(key);
        prop_assert_eq!(merged, sorted);
    }
}

// Independent hull: gift wrapping, counter-clockwise, strict turns only.
fn jarvis_hull(pts: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let start = pts
        .iter()
        .copied()
        .min_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
        .unwrap();
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = if pts[0] == current { pts[1] } else { pts[0] };
        for p in pts {
            let c = (next - current).perp(&(p - current));
            let farther = (p - current).norm_squared() > (next - current).norm_squared();
            if c < 0.0 || (c == 0.0 && farther) {
                next = *p;
            }
        }
        if next == start {
            return hull;
        }
        hull.push(next);
        current = next;
    }
}

// Smallest bounding-box area over the orientations of all hull edges.
fn hull_edge_oracle_area(pts: &[Vector2<f64>]) -> f64 {
    let hull = jarvis_hull(pts);
    (0..hull.len())
        .map(|i| {
            let e = (hull[(i + 1) % hull.len()] - hull[i]).normalize();
            let n = Vector2::new(-e.y, e.x);
            let (mut a0, mut a1, mut b0, mut b1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for p in pts {
                a0 = a0.min(p.dot(&e));
                a1 = a1.max(p.dot(&e));
                b0 = b0.min(p.dot(&n));
                b1 = b1.max(p.dot(&n));
            }
            (a1 - a0) * (b1 - b0)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn min_area_rect_beats_every_hull_edge_candidate_on_1000_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let pts: Vec<_> = (0..1000)
            .map(|_| Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-0.3..0.3)))
            .map(|p| Rotation2::new(0.4) * p)
            .collect();
        let rect = fit_min_area_rect(&pts).unwrap();
        let oracle = hull_edge_oracle_area(&pts);
        assert!(rect.area() <= oracle * (1.0 + 1e-9), "{} vs {oracle}", rect.area());
        assert!((rect.area() - oracle).abs() <= 1e-9 * oracle.max(1.0));
        assert!(pts.iter().all(|p| rect.contains(p, 1e-9)));
    }
}

#[test]
fn hull_agrees_with_gift_wrapping() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<_> = (0..500)
        .map(|_| Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut a = convex_hull(&pts);
    let mut b = jarvis_hull(&pts);
    let key = |p: &Vector2<f64>, q: &Vector2<f64>| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y));
    a.sort_by(key);
    b.sort_by(key);
    assert_eq!(a, b);
}

#[test]
fn rotated_unit_square_fits_at_thirty_degrees() {
    let rot = Rotation2::new(PI / 6.0);
    let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]].map(|[x, y]| rot * Vector2::new(x, y));
    let rect = fit_min_area_rect(&square).unwrap();
    assert!((rect.area() - 1.0).abs() < 1e-9);
    assert!((rect.angle - PI / 6.0).abs() < 1e-9);
}

fn encloses(rect: &Rect2D, pts: &[Vector2<f64>]) -> bool {
    let back = Rotation2::new(-rect.angle);
    pts.iter().all(|p| {
        let local = back * (p - rect.center);
        local.x.abs() <= rect.half_extents.x + 1e-9 && local.y.abs() <= rect.half_extents.y + 1e-9
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn min_area_rect_contains_inputs_and_is_optimal(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..80),
    ) {
        let pts: Vec<_> = raw.iter().map(|&(x, y)| Vector2::new(x, y)).collect();
        let Ok(rect) = fit_min_area_rect(&pts) else { return Ok(()) };
        prop_assert!(pts.iter().all(|p| rect.contains(p, 1e-9)));
        let oracle = hull_edge_oracle_area(&pts);
        prop_assert!(rect.area() <= oracle + 1e-9);
    }

    #[test]
    fn min_area_rect_is_rotation_equivariant(
        raw in prop::collection::vec((-1.0..1.0f64, -0.4..0.4f64), 5..60),
        phi in -PI..PI,
    ) {
        let pts: Vec<_> = raw.iter().map(|&(x, y)| Vector2::new(x, y)).collect();
        let Ok(a) = fit_min_area_rect(&pts) else { return Ok(()) };
        let rot = Rotation2::new(phi);
        let turned: Vec<_> = pts.iter().map(|p| rot * p).collect();
        let b = fit_min_area_rect(&turned).unwrap();
        prop_assert!((a.area() - b.area()).abs() <= 1e-9);
        // Several orientations can tie for the minimum, so compare the
        // rectangles by what they enclose rather than by angle.
        let turned_a = Rect2D { center: rot * a.center, half_extents: a.half_extents, angle: a.angle + phi };
        prop_assert!(encloses(&turned_a, &turned));
        prop_assert!(encloses(&b, &turned));
    }

    #[test]
    fn extruded_volume_is_area_times_height(
        cx in -1.0..1.0f64, cy in -1.0..1.0f64, a in 0.01..0.5f64, b in 0.01..0.5f64,
        angle in 0.0..FRAC_PI_2, h in 0.01..0.5f64,
        nx in -0.3..0.3f64, ny in -0.3..0.3f64, offset in -1.0..1.0f64,
    ) {
        let rect = Rect2D { center: Vector2::new(cx, cy), half_extents: Vector2::new(a, b), angle };
        let plane = Plane::new(Vector3::new(nx, ny, 1.0), offset).unwrap();
        let bx = extrude_box(&rect, &plane, h, "x").unwrap();
        prop_assert!(bx.is_valid());
        prop_assert!((bx.volume() - rect.area() * h).abs() <= 1e-9);
        prop_assert!((plane.signed_distance(&bx.center) - 0.5 * h).abs() <= 1e-9);
    }
}

fn floor_world(object: CatalogObject) -> WorldModel {
    WorldModel {
        furniture: Vec::new(),
        objects: vec![object],
        ..WorldModel::default()
    }
}

fn floor_object(
    label: &str,
    shape: ObjectShape,
    xy: Vector2<f64>,
    height: f64,
    footprint: [f64; 2],
    yaw: f64,
) -> CatalogObject {
    CatalogObject {
        label: label.into(),
        shape,
        height,
        footprint,
        pose: Pose3D::new(
            Vector3::new(xy.x, xy.y, 0.5 * height),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw),
        ),
    }
}

struct FloorScene {
    world: WorldModel,
    robot: Pose2D,
    camera: CameraModel,
}

impl FloorScene {
    fn new(object: CatalogObject) -> Self {
        let xy = object.center().xy();
        FloorScene {
            world: floor_world(object),
            robot: Pose2D::new(xy.x - 0.9, xy.y, 0.0),
            // Lower and steeper than the head camera so floor objects sit
            // inside both the view and the perception range.
            camera: CameraModel {
                mount_pose: Pose3D::from_position(Vector3::new(0.0, 0.0, 1.0)),
                tilt: PI / 4.0,
                ..CameraModel::default()
            },
        }
    }

    fn object(&self) -> &CatalogObject {
        &self.world.objects[0]
    }

    fn estimate_error(&self, noise: &NoiseModel, seed: u64) -> f64 {
        let cloud = synthesize_cloud(&self.world, &self.robot, &self.camera, 10_000.0, noise, seed);
        let roi = detect_objects_2d_sim(&self.world, &self.robot, &self.camera, &NoiseModel::zero(), 0)
            .pop()
            .expect("object in view");
        let o = self.object();
        let b = estimate_box(&cloud, &roi, &self.camera, o.height, &PerceptionParams::default(), seed).unwrap();
        let world = self
            .camera
            .world_from_camera(&self.robot)
            .transform_point(&b.center.into())
            .coords;
        (world - o.center()).norm()
    }
}

#[test]
fn can_on_the_floor_within_a_centimeter() {
    let scene = FloorScene::new(floor_object(
        "can",
        ObjectShape::Cylinder,
        Vector2::new(4.0, 4.0),
        0.12,
        [0.06, 0.06],
        0.0,
    ));
    let noise = NoiseModel {
        cloud_sigma: 0.002,
        ..NoiseModel::zero()
    };
    for seed in 0..5 {
        let e = scene.estimate_error(&noise, seed);
        assert!(e <= 0.01, "seed {seed}: {e}");
    }
}

#[test]
fn noise_free_box_within_a_millimeter() {
    for (k, yaw) in [0.0, 0.3, 0.7, 1.2].into_iter().enumerate() {
        let scene = FloorScene::new(floor_object(
            "box",
            ObjectShape::Box,
            Vector2::new(4.0, 4.0 + 0.1 * k as f64),
            0.2,
            [0.08, 0.12],
            yaw,
        ));
        let e = scene.estimate_error(&NoiseModel::zero(), 1);
        assert!(e <= 1e-3, "yaw {yaw}: {e}");
    }
}

#[test]
fn empty_floor_region_has_no_cluster() {
    let scene = FloorScene::new(floor_object(
        "box",
        ObjectShape::Box,
        Vector2::new(4.0, 4.0),
        0.2,
        [0.08, 0.12],
        0.0,
    ));
    let cloud = synthesize_cloud(
        &scene.world,
        &scene.robot,
        &scene.camera,
        10_000.0,
        &NoiseModel::zero(),
        0,
    );
    let roi = Roi2D::new(20.0, 400.0, 60.0, 60.0, "box", 1.0).unwrap();
    let err = estimate_box(&cloud, &roi, &scene.camera, 0.2, &PerceptionParams::default(), 0).unwrap_err();
    assert!(matches!(err, Error::NoCluster { .. }), "{err}");
}

#[test]
fn roi_gating_keeps_the_object_and_drops_outside_floor() {
    let scene = FloorScene::new(floor_object(
        "box",
        ObjectShape::Box,
        Vector2::new(4.0, 4.0),
        0.2,
        [0.1, 0.1],
        0.4,
    ));
    let cloud = synthesize_cloud(
        &scene.world,
        &scene.robot,
        &scene.camera,
        10_000.0,
        &NoiseModel::zero(),
        0,
    );
    let roi = detect_objects_2d_sim(&scene.world, &scene.robot, &scene.camera, &NoiseModel::zero(), 0)
        .pop()
        .unwrap();
    let kept = extract_roi_points(&cloud, &roi, &scene.camera);
    let to_world = scene.camera.world_from_camera(&scene.robot);
    let o = scene.object();
    let on_object = |p: &Vector3<f64>| {
        let w = to_world.transform_point(&(*p).into()).coords;
        let local = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), -o.yaw()) * (w - o.center());
        local.x.abs() <= 0.05 + 1e-9 && local.y.abs() <= 0.05 + 1e-9 && local.z.abs() <= 0.1 + 1e-9
    };
    let object_points = cloud.iter().filter(|p| on_object(p)).count();
    assert!(object_points > 0);
    assert_eq!(kept.iter().filter(|p| on_object(p)).count(), object_points);
    let floor_outside = cloud
        .iter()
        .filter(|p| !on_object(p))
        .filter(|p| scene.camera.project(p).is_some_and(|px| !roi.contains(&px)))
        .count();
    assert!(floor_outside > 0);
    assert!(kept
        .iter()
        .all(|p| scene.camera.project(p).is_some_and(|px| roi.contains(&px))));
}

#[test]
fn projected_box_footprint_matches_the_catalog() {
    let scene = FloorScene::new(floor_object(
        "box",
        ObjectShape::Box,
        Vector2::new(4.0, 4.0),
        0.2,
        [0.08, 0.12],
        0.5,
    ));
    let cloud = synthesize_cloud(
        &scene.world,
        &scene.robot,
        &scene.camera,
        10_000.0,
        &NoiseModel::zero(),
        0,
    );
    let params = PerceptionParams::default();
    let seg = segment_floor_plane(&filter_range(&cloud, 3.0), &params, 0).unwrap();
    let object = euclidean_cluster(&seg.remainder, params.cluster_tol, params.cluster_min_size)
        .into_iter()
        .next()
        .unwrap();
    let rect = fit_min_area_rect(&project_to_plane(&object, &seg.plane)).unwrap();
    let mut sides = [2.0 * rect.half_extents.x, 2.0 * rect.half_extents.y];
    sides.sort_by(f64::total_cmp);
    assert!(
        (sides[0] - 0.08).abs() < 1e-6 && (sides[1] - 0.12).abs() < 1e-6,
        "{sides:?}"
    );
}

#[test]
fn pipeline_is_deterministic() {
    let cfg = Config::default();
    let robot = Pose2D::new(7.9, 3.85, 0.0);
    let camera = &cfg.robot.camera;
    let run = || {
        let cloud = synthesize_cloud(&cfg.world, &robot, camera, 10_000.0, &cfg.noise, 4);
        let roi = detect_objects_2d_sim(&cfg.world, &robot, camera, &cfg.noise, 4)
            .into_iter()
            .find(|r| r.label == "cola")
            .unwrap();
        (
            cloud.clone(),
            estimate_box(&cloud, &roi, camera, 0.122, &cfg.perception, 4).unwrap(),
        )
    };
    let (c1, b1) = run();
    let (c2, b2) = run();
    assert_eq!(c1.points(), c2.points());
    assert_eq!(b1, b2);
}

// Distance from a world point to the nearest simulated surface of a floor
// scene with one box.
fn surface_distance(p: &Vector3<f64>, o: &CatalogObject) -> f64 {
    let local = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), -o.yaw()) * (p - o.center());
    let h = Vector3::new(0.5 * o.footprint[0], 0.5 * o.footprint[1], 0.5 * o.height);
    let outside = Vector3::new(
        (local.x.abs() - h.x).max(0.0),
        (local.y.abs() - h.y).max(0.0),
        (local.z.abs() - h.z).max(0.0),
    );
    let box_dist = if outside.norm() > 0.0 {
        outside.norm()
    } else {
        (h - local.abs()).min()
    };
    box_dist.min(p.z.abs())
}

#[test]
fn noise_free_points_lie_on_floor_or_box() {
    let scene = FloorScene::new(floor_object(
        "box",
        ObjectShape::Box,
        Vector2::new(4.0, 4.0),
        0.2,
        [0.1, 0.15],
        0.3,
    ));
    let cloud = synthesize_cloud(
        &scene.world,
        &scene.robot,
        &scene.camera,
        10_000.0,
        &NoiseModel::zero(),
        0,
    );
    assert!(cloud.len() > 1000);
    let to_world = scene.camera.world_from_camera(&scene.robot);
    for p in cloud.iter() {
        let w = to_world.transform_point(&(*p).into()).coords;
        assert!(surface_distance(&w, scene.object()) <= 1e-9, "{w:?}");
    }
    let again = synthesize_cloud(
        &scene.world,
        &scene.robot,
        &scene.camera,
        10_000.0,
        &NoiseModel::zero(),
        0,
    );
    assert_eq!(cloud.points(), again.points());
}

#[test]
fn outlier_fraction_is_binomially_consistent() {
    let scene = FloorScene::new(floor_object(
        "box",
        ObjectShape::Box,
        Vector2::new(4.0, 4.0),
        0.2,
        [0.1, 0.15],
        0.3,
    ));
    let noise = NoiseModel {
        cloud_sigma: 0.002,
        outlier_fraction: 0.1,
        ..NoiseModel::zero()
    };
    // Low density keeps the cloud near 1000 points.
    let to_world = scene.camera.world_from_camera(&scene.robot);
    let density = 330.0;
    let mut total = 0;
    for seed in 0..4 {
        let cloud = synthesize_cloud(&scene.world, &scene.robot, &scene.camera, density, &noise, seed);
        let n = cloud.len() as f64;
        let far = cloud
            .iter()
            .filter(|p| {
                surface_distance(&to_world.transform_point(&(**p).into()).coords, scene.object())
                    > 3.0 * 0.002 * 3f64.sqrt()
            })
            .count() as f64;
        // Expected ~0.1 n; an outlier may land near a surface by chance.
        let sd = (n * 0.1 * 0.9).sqrt();
        assert!(
            (far - 0.1 * n).abs() <= 3.0 * sd + 0.02 * n,
            "seed {seed}: {far} of {n}"
        );
        total += cloud.len();
    }
    assert!(total > 2000);
}
