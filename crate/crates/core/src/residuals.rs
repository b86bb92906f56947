use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Named absolute residuals of identities evaluated at a sample point.
/// Insertion order is preserved for reports.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualRecord {
    entries: Vec<(String, f64)>,
}

impl ResidualRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `value` under `name`; an existing entry keeps the larger value.
    pub fn push(&mut self, name: &str, value: f64) {
        let value = if value.is_nan() { f64::INFINITY } else { value.abs() };
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = v.max(value),
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, (_, v)| acc.max(*v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    /// Entries strictly above `tolerance`.
    pub fn breaches(&self, tolerance: f64) -> Vec<(&str, f64)> {
        self.iter().filter(|(_, v)| *v > tolerance).collect()
    }

    /// Entrywise maximum with another record (used to aggregate samples).
    pub fn absorb(&mut self, other: &ResidualRecord) {
        for (name, value) in other.iter() {
            self.push(name, value);
        }
    }
}

impl Serialize for ResidualRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_keeps_max_and_order() {
        let mut r = ResidualRecord::new();
        r.push("b", 1e-3);
        r.push("a", -2e-3);
        r.push("b", 5e-4);
        assert_eq!(r.get("b"), Some(1e-3));
        assert_eq!(r.get("a"), Some(2e-3));
        assert_eq!(r.iter().map(|(n, _)| n).collect::<Vec<_>>(), vec!["b", "a"]);
        assert_eq!(r.breaches(1.5e-3), vec![("a", 2e-3)]);
    }

    #[test]
    fn nan_is_a_breach() {
        let mut r = ResidualRecord::new();
        r.push("x", f64::NAN);
        assert_eq!(r.breaches(1.0).len(), 1);
    }
}
