use std::path::Path;

use crate::syntax::ResourceId;

pub const UNKNOWN_CATEGORY: &str = "Unknown";

const DEFAULT_CATEGORIES: [(&str, &[&str]); 7] = [
    (
        "ContinuousIntegration",
        &["jenkins", "gitlab-ci", "gitlab_ci", "travis", "buildbot", "zuul", "bamboo", "teamcity"],
    ),
    (
        "CommunicationPlatforms",
        &["slack", "discourse", "irc", "mattermost", "hipchat", "rocketchat", "zulip"],
    ),
    (
        "Containerization",
        &["docker", "magnum", "kubernetes", "k8s", "kubelet", "container", "podman", "lxc", "openshift"],
    ),
    (
        "DataStorage",
        &[
            "mysql", "postgres", "memcached", "redis", "mongodb", "database", "cassandra",
            "elasticsearch", "couchdb", "mariadb", "ceph", "storage",
        ],
    ),
    ("File", &["file", "concat"]),
    (
        "LoadBalancers",
        &["haproxy", "load_balanc", "loadbalanc", "keepalived", "lvs"],
    ),
    (
        "Networking",
        &[
            "firewall", "vlan", "onos", "network", "neutron", "iptables", "ufw", "opendaylight",
            "openvswitch", "ovs",
        ],
    ),
];

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("cannot read taxonomy file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed taxonomy file {path}: {message}")]
    Format { path: String, message: String },
}

/// Ordered keyword lists; the first category with a keyword contained in
/// the text wins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceTaxonomy {
    categories: Vec<(String, Vec<String>)>,
}

impl Default for ResourceTaxonomy {
    fn default() -> Self {
        ResourceTaxonomy {
            categories: DEFAULT_CATEGORIES
                .iter()
                .map(|(name, words)| (name.to_string(), words.iter().map(|w| w.to_string()).collect()))
                .collect(),
        }
    }
}

impl ResourceTaxonomy {
    pub fn new(categories: Vec<(String, Vec<String>)>) -> Self {
        ResourceTaxonomy {
            categories: categories
                .into_iter()
                .map(|(name, words)| (name, words.into_iter().map(|w| w.to_lowercase()).collect()))
                .collect(),
        }
    }

    /// JSON object of category name to keyword list; key order is kept.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, TaxonomyError> {
        let format_err = |message: String| TaxonomyError::Format {
            path: origin.to_string(),
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
        let object = value
            .as_object()
            .ok_or_else(|| format_err("expected a JSON object".into()))?;
        let mut categories = Vec::with_capacity(object.len());
        for (name, words) in object {
            let words: Vec<String> = serde_json::from_value(words.clone())
                .map_err(|e| format_err(format!("category {name}: {e}")))?;
            categories.push((name.clone(), words));
        }
        Ok(Self::new(categories))
    }

    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn category_names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|(n, _)| n.as_str())
    }

    fn first_match(&self, text: &str) -> Option<&str> {
        let lowered = text.to_lowercase();
        self.categories
            .iter()
            .find(|(_, words)| words.iter().any(|w| lowered.contains(w.as_str())))
            .map(|(name, _)| name.as_str())
    }

    /// Category of a resource, trying its type before its title.
    pub fn categorize(&self, resource_type: &str, resource_title: &str) -> Option<&str> {
        self.first_match(resource_type)
            .or_else(|| self.first_match(resource_title))
    }

    /// Like [`categorize`](Self::categorize), falling back to the file
    /// name of the manifest the resource is declared in.
    pub fn categorize_resource_id(&self, resource: &ResourceId) -> &str {
        self.categorize(&resource.resource_type, &resource.resource_title)
            .or_else(|| {
                Path::new(&*resource.manifest_path)
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .and_then(|stem| self.first_match(stem))
            })
            .unwrap_or(UNKNOWN_CATEGORY)
    }
}

/// Category of a resource by type and title alone, `Unknown` if none
/// matches.
pub fn categorize_resource(
    resource_type: &str,
    resource_title: &str,
    taxonomy: &ResourceTaxonomy,
) -> String {
    taxonomy
        .categorize(resource_type, resource_title)
        .unwrap_or(UNKNOWN_CATEGORY)
        .to_string()
}
