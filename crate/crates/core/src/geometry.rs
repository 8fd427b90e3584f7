//! Direction grids and microphone array layouts.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// Identity of a direction grid, derived from its contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridId(pub u64);

/// Candidate plane-wave directions with mesh adjacency.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    directions: Vec<Vec3>,
    adjacency: Vec<Vec<usize>>,
    subdivision_level: usize,
    id: GridId,
}

fn fingerprint(dirs: &[Vec3]) -> GridId {
    // FNV-1a over the coordinate bit patterns
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for d in dirs {
        for c in d.iter() {
            for b in c.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    GridId(h)
}

impl DirectionGrid {
    /// Builds a grid from arbitrary unit vectors without adjacency.
    pub fn from_directions(directions: Vec<Vec3>) -> Self {
        let directions: Vec<Vec3> = directions.into_iter().map(|d| d.normalize()).collect();
        let id = fingerprint(&directions);
        let adjacency = vec![Vec::new(); directions.len()];
        Self {
            directions,
            adjacency,
            subdivision_level: 0,
            id,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn direction(&self, i: usize) -> Vec3 {
        self.directions[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn subdivision_level(&self) -> usize {
        self.subdivision_level
    }

    pub fn id(&self) -> GridId {
        self.id
    }

    /// Indices of all grid directions within `radius` radians of `dir`.
    pub fn within(&self, dir: &Vec3, radius: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| angular_distance(dir, &self.directions[j]) <= radius)
            .collect()
    }

    /// CSV with columns `index,x,y,z,azimuth_deg,elevation_deg`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,x,y,z,azimuth_deg,elevation_deg\n");
        for (i, d) in self.directions.iter().enumerate() {
            let (az, el) = azimuth_elevation(d);
            let _ = writeln!(
                s,
                "{i},{:.9},{:.9},{:.9},{:.6},{:.6}",
                d.x,
                d.y,
                d.z,
                az.to_degrees(),
                el.to_degrees()
            );
        }
        s
    }
}

/// Subdivided icosahedron projected onto the unit sphere.
///
/// The base icosahedron has vertices at both poles, so `+z` and `-z` are grid
/// directions at every level. Vertex counts are 12, 42, 162, 642, 2562, ...
pub fn icosphere(subdivisions: usize) -> DirectionGrid {
    assert!(subdivisions <= 6, "icosphere subdivision level {subdivisions} > 6");
    let ring_z = 1.0 / 5f64.sqrt();
    let ring_r = 2.0 / 5f64.sqrt();
    let mut verts: Vec<Vec3> = Vec::with_capacity(12);
    verts.push(Vec3::new(0.0, 0.0, 1.0));
    for k in 0..5 {
        let az = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
        verts.push(Vec3::new(ring_r * az.cos(), ring_r * az.sin(), ring_z));
    }
    for k in 0..5 {
        let az = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 5.0;
        verts.push(Vec3::new(ring_r * az.cos(), ring_r * az.sin(), -ring_z));
    }
    verts.push(Vec3::new(0.0, 0.0, -1.0));

    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(20);
    for k in 0..5 {
        let u0 = 1 + k;
        let u1 = 1 + (k + 1) % 5;
        let l0 = 6 + k;
        let l1 = 6 + (k + 1) % 5;
        faces.push([0, u0, u1]);
        faces.push([u0, l0, u1]);
        faces.push([u1, l0, l1]);
        faces.push([11, l1, l0]);
    }

    for _ in 0..subdivisions {
        // midpoints are keyed by their (unordered) parent edge, so a vertex
        // shared by two faces is created once
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    let mut adjacency = vec![Vec::new(); verts.len()];
    for f in &faces {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    let verts: Vec<Vec3> = verts.into_iter().map(|v| v.normalize()).collect();
    let id = fingerprint(&verts);
    DirectionGrid {
        directions: verts,
        adjacency,
        subdivision_level: subdivisions,
        id,
    }
}

/// Great-circle angle between two unit vectors, in `[0, pi]`.
pub fn angular_distance(a: &Vec3, b: &Vec3) -> f64 {
    // atan2 form keeps full precision near 0 and pi
    a.cross(b).norm().atan2(a.dot(b))
}

/// Index of the grid direction closest to `dir`; ties go to the lowest index.
pub fn nearest_grid_index(grid: &DirectionGrid, dir: &Vec3) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, g) in grid.directions().iter().enumerate() {
        let d = angular_distance(g, dir);
        if d < best_dist {
            best = i;
            best_dist = d;
        }
    }
    best
}

/// `(azimuth, elevation)` in radians; azimuth from +x towards +y.
pub fn azimuth_elevation(d: &Vec3) -> (f64, f64) {
    let n = d.norm();
    (d.y.atan2(d.x), (d.z / n).clamp(-1.0, 1.0).asin())
}

/// `(inclination from +z, azimuth)` in radians.
pub fn inclination_azimuth(d: &Vec3) -> (f64, f64) {
    let n = d.norm();
    ((d.z / n).clamp(-1.0, 1.0).acos(), d.y.atan2(d.x))
}

pub fn from_azimuth_elevation(az: f64, el: f64) -> Vec3 {
    Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrayKind {
    SphericalOpen { radius: f64 },
    Linear { spacing: f64 },
}

/// Microphone positions (room coordinates, meters) of one array.
#[derive(Debug, Clone)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub positions: Vec<Vec3>,
    pub center: Vec3,
    pub label: String,
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions relative to `origin`.
    pub fn relative_to(&self, origin: &Vec3) -> Vec<Vec3> {
        self.positions.iter().map(|p| p - origin).collect()
    }

    /// Rigidly translates the array.
    pub fn translated(&self, offset: &Vec3) -> Self {
        Self {
            kind: self.kind,
            positions: self.positions.iter().map(|p| p + offset).collect(),
            center: self.center + offset,
            label: self.label.clone(),
        }
    }
}

/// Open spherical array of `count` microphones on a Fibonacci spiral.
pub fn spherical_array(center: Vec3, radius: f64, count: usize, label: &str) -> ArrayGeometry {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let positions = (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            center + radius * Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect();
    ArrayGeometry {
        kind: ArrayKind::SphericalOpen { radius },
        positions,
        center,
        label: label.to_string(),
    }
}

/// Uniform line array centered at `center` along unit `axis`.
pub fn linear_array(center: Vec3, axis: Vec3, spacing: f64, count: usize, label: &str) -> ArrayGeometry {
    let axis = axis.normalize();
    let mid = (count as f64 - 1.0) / 2.0;
    let positions = (0..count)
        .map(|i| center + (i as f64 - mid) * spacing * axis)
        .collect();
    ArrayGeometry {
        kind: ArrayKind::Linear { spacing },
        positions,
        center,
        label: label.to_string(),
    }
}

/// The 64-microphone, 10 cm open sphere.
pub fn default_sma_geometry(center: Vec3) -> ArrayGeometry {
    spherical_array(center, 0.10, 64, "sma")
}

/// Four 8-microphone lines (4 cm spacing) 0.5 m from the SMA center, two
/// along x and two along y, each oriented along its offset axis and at the
/// SMA height.
pub fn default_lma_geometries(center: Vec3) -> Vec<ArrayGeometry> {
    let x = Vec3::x();
    let y = Vec3::y();
    vec![
        linear_array(center + 0.5 * x, x, 0.04, 8, "lma+x"),
        linear_array(center - 0.5 * x, x, 0.04, 8, "lma-x"),
        linear_array(center + 0.5 * y, y, 0.04, 8, "lma+y"),
        linear_array(center - 0.5 * y, y, 0.04, 8, "lma-y"),
    ]
}
