use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names of the built-in schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaName {
    CicDdos2019,
    CseCicIds2018,
    NslKdd,
    Generic,
}

impl SchemaName {
    pub const ALL: [SchemaName; 4] = [
        SchemaName::CicDdos2019,
        SchemaName::CseCicIds2018,
        SchemaName::NslKdd,
        SchemaName::Generic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaName::CicDdos2019 => "cic_ddos2019",
            SchemaName::CseCicIds2018 => "cse_cic_ids2018",
            SchemaName::NslKdd => "nsl_kdd",
            SchemaName::Generic => "generic",
        }
    }
}

impl std::str::FromStr for SchemaName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemaName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::UnknownSchema(s.to_string()))
    }
}

impl std::fmt::Display for SchemaName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// KDDTrain+/KDDTest+ ship without a header row; these are the conventional
/// column names, 41 features followed by the attack label and the
/// difficulty score.
pub const NSL_KDD_COLUMNS: [&str; 43] = [
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
    "label",
    "difficulty",
];

/// Describes how a CSV file maps onto features and a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: SchemaName,
    pub label_column: String,
    /// Columns removed before modeling. Names absent from the file are ignored.
    pub drop_columns: Vec<String>,
    pub header_present: bool,
    /// Column names used when the file has no header row. When empty,
    /// headerless files get `col_0`, `col_1`, ...
    #[serde(default)]
    pub column_names: Vec<String>,
}

impl DatasetSchema {
    pub fn cic_ddos2019() -> Self {
        DatasetSchema {
            name: SchemaName::CicDdos2019,
            label_column: "Label".into(),
            drop_columns: [
                "Unnamed: 0",
                "Flow ID",
                "Source IP",
                "Destination IP",
                "Timestamp",
                "SimillarHTTP",
            ]
            .map(String::from)
            .to_vec(),
            header_present: true,
            column_names: Vec::new(),
        }
    }

    pub fn cse_cic_ids2018() -> Self {
        DatasetSchema {
            name: SchemaName::CseCicIds2018,
            label_column: "Label".into(),
            drop_columns: vec!["Timestamp".into()],
            header_present: true,
            column_names: Vec::new(),
        }
    }

    pub fn nsl_kdd() -> Self {
        DatasetSchema {
            name: SchemaName::NslKdd,
            label_column: "label".into(),
            drop_columns: vec!["id".into(), "difficulty".into()],
            header_present: false,
            column_names: NSL_KDD_COLUMNS.map(String::from).to_vec(),
        }
    }

    pub fn generic(label_column: impl Into<String>, drop_columns: Vec<String>) -> Self {
        DatasetSchema {
            name: SchemaName::Generic,
            label_column: label_column.into(),
            drop_columns,
            header_present: true,
            column_names: Vec::new(),
        }
    }

    /// Built-in schema registry. `generic` gets label column `label` and no
    /// drops; use [`DatasetSchema::generic`] to customize it.
    pub fn builtin(name: SchemaName) -> Self {
        match name {
            SchemaName::CicDdos2019 => Self::cic_ddos2019(),
            SchemaName::CseCicIds2018 => Self::cse_cic_ids2018(),
            SchemaName::NslKdd => Self::nsl_kdd(),
            SchemaName::Generic => Self::generic("label", Vec::new()),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::builtin(name.parse()?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.drop_columns.iter().any(|c| c == &self.label_column) {
            return Err(Error::InvalidSchema(format!(
                "label column `{}` is also listed for dropping",
                self.label_column
            )));
        }
        Ok(())
    }

    pub fn drops(&self, column: &str) -> bool {
        self.drop_columns.iter().any(|c| c == column)
    }
}
