//! Scene state: object shapes with their planar poses, and object groups.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexPolygon, Point2, Pose2};

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("object group is empty")]
    EmptyGroup,
    #[error("object id {0} is not in the scene")]
    UnknownObject(usize),
    #[error("duplicate object id {0}")]
    DuplicateId(usize),
    #[error("invalid scene file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One rigid object: a convex shape in its local frame and its pose on the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: usize,
    pub vertices: ConvexPolygon,
    pub pose: Pose2,
}

impl SceneObject {
    pub fn new(id: usize, shape: ConvexPolygon, pose: Pose2) -> Self {
        SceneObject { id, vertices: shape, pose }
    }

    #[inline]
    pub fn shape(&self) -> &ConvexPolygon {
        &self.vertices
    }

    /// The shape placed at its pose.
    pub fn world_polygon(&self) -> ConvexPolygon {
        self.vertices.transform(&self.pose)
    }

    pub fn world_centroid(&self) -> Point2 {
        self.pose.apply(self.vertices.centroid())
    }
}

#[derive(Deserialize)]
struct RawObject {
    id: Option<usize>,
    vertices: ConvexPolygon,
    #[serde(default)]
    pose: Pose2,
}

/// Objects on the table. Ids are stable across removals.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct Scene {
    objects: Vec<SceneObject>,
}

impl<'de> Deserialize<'de> for Scene {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<RawObject>::deserialize(d)?;
        let objects = raw
            .into_iter()
            .enumerate()
            .map(|(i, r)| SceneObject {
                id: r.id.unwrap_or(i),
                vertices: r.vertices,
                pose: Pose2::new(r.pose.x, r.pose.y, r.pose.theta),
            })
            .collect();
        Scene::new(objects).map_err(serde::de::Error::custom)
    }
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>) -> Result<Self, SceneError> {
        let mut ids: Vec<usize> = objects.iter().map(|o| o.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(SceneError::DuplicateId(w[0]));
        }
        Ok(Scene { objects })
    }

    /// Builds a scene with ids `0..n` in order.
    pub fn from_shapes(items: impl IntoIterator<Item = (ConvexPolygon, Pose2)>) -> Self {
        Scene {
            objects: items
                .into_iter()
                .enumerate()
                .map(|(id, (shape, pose))| SceneObject::new(id, shape, pose))
                .collect(),
        }
    }

    #[inline]
    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.objects.iter().map(|o| o.id)
    }

    pub fn get(&self, id: usize) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object(&self, id: usize) -> Result<&SceneObject, SceneError> {
        self.get(id).ok_or(SceneError::UnknownObject(id))
    }

    pub fn set_pose(&mut self, id: usize, pose: Pose2) -> Result<(), SceneError> {
        let o = self.objects.iter_mut().find(|o| o.id == id).ok_or(SceneError::UnknownObject(id))?;
        o.pose = pose;
        Ok(())
    }

    /// Removes the given ids; unknown ids are ignored.
    pub fn remove(&mut self, ids: &[usize]) {
        self.objects.retain(|o| !ids.contains(&o.id));
    }

    /// Applies the same rigid motion to every object.
    pub fn transformed(&self, motion: &Pose2) -> Scene {
        Scene {
            objects: self
                .objects
                .iter()
                .map(|o| SceneObject { id: o.id, vertices: o.vertices.clone(), pose: motion.compose(&o.pose) })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SceneError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SceneError> {
        Scene::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Ordered set of object ids considered together for one grasp.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ObjectGroup {
    members: Vec<usize>,
}

impl TryFrom<Vec<usize>> for ObjectGroup {
    type Error = SceneError;
    fn try_from(v: Vec<usize>) -> Result<Self, SceneError> {
        ObjectGroup::new(v)
    }
}

impl From<ObjectGroup> for Vec<usize> {
    fn from(g: ObjectGroup) -> Self {
        g.members
    }
}

impl ObjectGroup {
    /// Sorts and deduplicates the ids.
    pub fn new(ids: impl IntoIterator<Item = usize>) -> Result<Self, SceneError> {
        let mut members: Vec<usize> = ids.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(SceneError::EmptyGroup);
        }
        Ok(ObjectGroup { members })
    }

    pub fn single(id: usize) -> Self {
        ObjectGroup { members: vec![id] }
    }

    /// Every object in the scene.
    pub fn all(scene: &Scene) -> Result<Self, SceneError> {
        ObjectGroup::new(scene.ids())
    }

    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Always false; groups are nonempty by construction.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn is_strict_subset_of(&self, other: &ObjectGroup) -> bool {
        self.len() < other.len() && self.members.iter().all(|m| other.contains(*m))
    }

    /// Checks every member exists in `scene`.
    pub fn validate(&self, scene: &Scene) -> Result<(), SceneError> {
        for &m in &self.members {
            scene.object(m)?;
        }
        Ok(())
    }

    /// Member objects in group order.
    pub fn objects<'a>(&'a self, scene: &'a Scene) -> Result<Vec<&'a SceneObject>, SceneError> {
        self.members.iter().map(|&m| scene.object(m)).collect()
    }
}
