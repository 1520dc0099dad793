//! The 16-rule registry and the checkers that combine slicing, data-only
//! tracking and refinement into findings.

use std::collections::BTreeSet;
use std::fmt;

use crate::ir::MethodSig;
use crate::refine::ValueKind;

mod checkers;

pub use checkers::{check_rule, registry_dump, CheckOutput, RuleRunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Severity {
    H,
    M,
    L,
}

impl Severity {
    pub fn rank(self) -> u8 {
        match self {
            Severity::H => 0,
            Severity::M => 1,
            Severity::L => 2,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::H => write!(f, "H"),
            Severity::M => write!(f, "M"),
            Severity::L => write!(f, "L"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub enum AnalysisPlan {
    InterBackward,
    InterBackwardDataOnlyForward,
    IntraBackward,
    IntraForward,
    Search,
    Combination,
}

/// How a criterion row anchors the analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CriterionTarget {
    /// Backward slice from this argument position of matching invokes.
    Arg(usize),
    /// Backward from return statements of implementations of the API.
    Return,
    /// Backward from throw statements of implementations of the API.
    Throw,
    /// Presence/shape of calls to this API inside the sliced method.
    Call,
    /// Forward slice from assignments produced by matching invokes.
    ForwardOrigin,
}

/// One row of the slicing-criteria tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Criterion {
    /// Table row label, e.g. "1.1".
    pub row: &'static str,
    pub api: MethodSig,
    pub target: CriterionTarget,
}

#[derive(Clone, Debug)]
pub struct RuleSpec {
    pub id: u8,
    pub title: &'static str,
    pub severity: Severity,
    pub plan: AnalysisPlan,
    pub criteria: Vec<Criterion>,
    pub insecure_names: Vec<&'static str>,
    /// Rule 13: minimum PBE iterations; rule 15: minimum key sizes.
    pub thresholds: Vec<(&'static str, i64)>,
}

impl RuleSpec {
    pub fn uses_data_only_tracking(&self) -> bool {
        matches!(self.plan, AnalysisPlan::InterBackwardDataOnlyForward)
            || (self.id == 15 && matches!(self.plan, AnalysisPlan::Combination))
    }

    /// Expected value kind for a criterion row (drives RI-IV).
    pub fn value_kind(&self, row: &str) -> ValueKind {
        match (self.id, row) {
            (1, _) | (10, _) | (12, _) => ValueKind::ByteArrayLike,
            (2, _) | (3, _) => ValueKind::CharArrayLike,
            (7, _) => ValueKind::UrlLike,
            (8, "8.3") => ValueKind::IntLike,
            (8, _) => ValueKind::ByteArrayLike,
            (11, _) | (14, _) | (16, _) => ValueKind::StringLike,
            (13, _) => ValueKind::IntLike,
            (15, "15.4") | (15, "15.5") => ValueKind::IntLike,
            (15, _) => ValueKind::StringLike,
            _ => ValueKind::StringLike,
        }
    }
}

fn sig(owner: &str, ret: &str, name: &str, params: &[&str]) -> MethodSig {
    MethodSig::new(owner, ret, name, params)
}

/// The full registry, severities and criteria as shipped.
pub fn registry() -> Vec<RuleSpec> {
    use CriterionTarget::*;
    let c = |row: &'static str, api: MethodSig, target: CriterionTarget| Criterion { row, api, target };
    vec![
        RuleSpec {
            id: 1,
            title: "Predictable/constant cryptographic keys",
            severity: Severity::H,
            plan: AnalysisPlan::InterBackwardDataOnlyForward,
            criteria: vec![
                c("1.1", sig("javax.crypto.spec.SecretKeySpec", "void", "<init>", &["byte[]", "java.lang.String"]), Arg(0)),
                c("1.2", sig("javax.crypto.spec.SecretKeySpec", "void", "<init>", &["byte[]", "int", "int", "java.lang.String"]), Arg(0)),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 2,
            title: "Predictable/constant passwords for PBE",
            severity: Severity::H,
            plan: AnalysisPlan::InterBackwardDataOnlyForward,
            criteria: vec![
                c("2.1", sig("javax.crypto.spec.PBEKeySpec", "void", "<init>", &["char[]"]), Arg(0)),
                c("2.2", sig("javax.crypto.spec.PBEKeySpec", "void", "<init>", &["char[]", "byte[]", "int", "int"]), Arg(0)),
                c("2.3", sig("javax.crypto.spec.PBEKeySpec", "void", "<init>", &["char[]", "byte[]", "int"]), Arg(0)),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 3,
            title: "Predictable/constant passwords for KeyStore",
            severity: Severity::H,
            plan: AnalysisPlan::InterBackwardDataOnlyForward,
            criteria: vec![
                c("3.1", sig("java.security.KeyStore", "void", "load", &["java.io.InputStream", "char[]"]), Arg(1)),
                c("3.2", sig("java.security.KeyStore", "void", "store", &["java.io.OutputStream", "char[]"]), Arg(1)),
                c("3.3", sig("java.security.KeyStore", "void", "setKeyEntry", &["java.lang.String", "java.security.Key", "char[]", "java.security.cert.Certificate[]"]), Arg(2)),
                c("3.4", sig("java.security.KeyStore", "java.security.Key", "getKey", &["java.lang.String", "char[]"]), Arg(1)),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 4,
            title: "Custom hostname verifiers accepting all hosts",
            severity: Severity::H,
            plan: AnalysisPlan::IntraBackward,
            criteria: vec![c(
                "4.1",
                sig("javax.net.ssl.HostnameVerifier", "boolean", "verify", &["java.lang.String", "javax.net.ssl.SSLSession"]),
                Return,
            )],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 5,
            title: "Custom TrustManager trusting all certificates",
            severity: Severity::H,
            plan: AnalysisPlan::IntraBackward,
            criteria: vec![
                c("5.1", sig("javax.net.ssl.X509TrustManager", "void", "checkServerTrusted", &["java.security.cert.X509Certificate[]", "java.lang.String"]), Call),
                c("5.2", sig("javax.net.ssl.X509TrustManager", "void", "checkServerTrusted", &["java.security.cert.X509Certificate[]", "java.lang.String"]), Throw),
                c("5.3", sig("javax.net.ssl.X509TrustManager", "java.security.cert.X509Certificate[]", "getAcceptedIssuers", &[]), Return),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 6,
            title: "SSLSocket without hostname verification",
            severity: Severity::H,
            plan: AnalysisPlan::IntraForward,
            criteria: vec![
                c("6.1", sig("javax.net.ssl.SSLSocketFactory", "javax.net.SocketFactory", "getDefault", &[]), ForwardOrigin),
                c("6.2", sig("javax.net.ssl.SSLContext", "javax.net.ssl.SSLSocketFactory", "getSocketFactory", &[]), ForwardOrigin),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 7,
            title: "Occasional use of HTTP",
            severity: Severity::H,
            plan: AnalysisPlan::InterBackward,
            criteria: vec![
                c("7.1", sig("java.net.URL", "void", "<init>", &["java.lang.String"]), Arg(0)),
                c("7.2", sig("java.net.URL", "void", "<init>", &["java.lang.String", "java.lang.String", "java.lang.String"]), Arg(0)),
                c("7.3", sig("java.net.URL", "void", "<init>", &["java.lang.String", "java.lang.String", "int", "java.lang.String"]), Arg(0)),
                c("7.4", sig("okhttp3.Request$Builder", "okhttp3.Request$Builder", "url", &["java.lang.String"]), Arg(0)),
                c("7.5", sig("retrofit2.Retrofit$Builder", "retrofit2.Retrofit$Builder", "baseUrl", &["java.lang.String"]), Arg(0)),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 8,
            title: "Predictable/constant PRNG seeds",
            severity: Severity::M,
            plan: AnalysisPlan::InterBackwardDataOnlyForward,
            criteria: vec![
                c("8.1", sig("java.security.SecureRandom", "void", "<init>", &["byte[]"]), Arg(0)),
                c("8.2", sig("java.security.SecureRandom", "void", "setSeed", &["byte[]"]), Arg(0)),
                c("8.3", sig("java.security.SecureRandom", "void", "setSeed", &["long"]), Arg(0)),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 9,
            title: "Cryptographically insecure PRNGs",
            severity: Severity::M,
            plan: AnalysisPlan::Search,
            criteria: vec![c("9.1", sig("java.util.Random", "void", "<init>", &[]), Call)],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 10,
            title: "Static salts in PBE",
            severity: Severity::M,
            plan: AnalysisPlan::InterBackwardDataOnlyForward,
            criteria: vec![
                c("10.1", sig("javax.crypto.spec.PBEParameterSpec", "void", "<init>", &["byte[]", "int"]), Arg(0)),
                c("10.2", sig("javax.crypto.spec.PBEParameterSpec", "void", "<init>", &["byte[]", "int", "java.security.spec.AlgorithmParameterSpec"]), Arg(0)),
                c("10.3", sig("javax.crypto.spec.PBEKeySpec", "void", "<init>", &["char[]", "byte[]", "int", "int"]), Arg(1)),
                c("10.4", sig("javax.crypto.spec.PBEKeySpec", "void", "<init>", &["char[]", "byte[]", "int"]), Arg(1)),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 11,
            title: "ECB mode in symmetric ciphers",
            severity: Severity::M,
            plan: AnalysisPlan::InterBackward,
            criteria: vec![
                c("11.1", sig("javax.crypto.Cipher", "javax.crypto.Cipher", "getInstance", &["java.lang.String"]), Arg(0)),
                c("11.2", sig("javax.crypto.Cipher", "javax.crypto.Cipher", "getInstance", &["java.lang.String", "java.lang.String"]), Arg(0)),
                c("11.3", sig("javax.crypto.Cipher", "javax.crypto.Cipher", "getInstance", &["java.lang.String", "java.security.Provider"]), Arg(0)),
            ],
            insecure_names: vec!["AES", "DES", "DESede", "3DES", "IDEA", "Blowfish", "RC2"],
            thresholds: vec![],
        },
        RuleSpec {
            id: 12,
            title: "Static IVs in CBC mode symmetric ciphers",
            severity: Severity::M,
            plan: AnalysisPlan::InterBackwardDataOnlyForward,
            criteria: vec![
                c("12.1", sig("javax.crypto.spec.IvParameterSpec", "void", "<init>", &["byte[]"]), Arg(0)),
                c("12.2", sig("javax.crypto.spec.IvParameterSpec", "void", "<init>", &["byte[]", "int", "int"]), Arg(0)),
            ],
            insecure_names: vec![],
            thresholds: vec![],
        },
        RuleSpec {
            id: 13,
            title: "Fewer than 1,000 iterations for PBE",
            severity: Severity::L,
            plan: AnalysisPlan::InterBackwardDataOnlyForward,
            criteria: vec![
                c("13.1", sig("javax.crypto.spec.PBEParameterSpec", "void", "<init>", &["byte[]", "int"]), Arg(1)),
                c("13.2", sig("javax.crypto.spec.PBEParameterSpec", "void", "<init>", &["byte[]", "int", "java.security.spec.AlgorithmParameterSpec"]), Arg(1)),
                c("13.3", sig("javax.crypto.spec.PBEKeySpec", "void", "<init>", &["char[]", "byte[]", "int", "int"]), Arg(2)),
                c("13.4", sig("javax.crypto.spec.PBEKeySpec", "void", "<init>", &["char[]", "byte[]", "int"]), Arg(2)),
            ],
            insecure_names: vec![],
            thresholds: vec![("iterations", 1000)],
        },
        RuleSpec {
            id: 14,
            title: "64-bit block ciphers",
            severity: Severity::L,
            plan: AnalysisPlan::InterBackward,
            criteria: vec![
                c("11.1", sig("javax.crypto.Cipher", "javax.crypto.Cipher", "getInstance", &["java.lang.String"]), Arg(0)),
                c("11.2", sig("javax.crypto.Cipher", "javax.crypto.Cipher", "getInstance", &["java.lang.String", "java.lang.String"]), Arg(0)),
                c("11.3", sig("javax.crypto.Cipher", "javax.crypto.Cipher", "getInstance", &["java.lang.String", "java.security.Provider"]), Arg(0)),
            ],
            insecure_names: vec!["DES", "DESede", "3DES", "IDEA", "Blowfish", "RC4", "RC2"],
            thresholds: vec![],
        },
        RuleSpec {
            id: 15,
            title: "Insecure asymmetric ciphers",
            severity: Severity::L,
            plan: AnalysisPlan::Combination,
            criteria: vec![
                c("15.1", sig("java.security.KeyPairGenerator", "java.security.KeyPairGenerator", "getInstance", &["java.lang.String"]), ForwardOrigin),
                c("15.2", sig("java.security.KeyPairGenerator", "java.security.KeyPairGenerator", "getInstance", &["java.lang.String", "java.lang.String"]), ForwardOrigin),
                c("15.3", sig("java.security.KeyPairGenerator", "java.security.KeyPairGenerator", "getInstance", &["java.lang.String", "java.security.Provider"]), ForwardOrigin),
                c("15.4", sig("java.security.KeyPairGenerator", "void", "initialize", &["int"]), Arg(0)),
                c("15.5", sig("java.security.KeyPairGenerator", "void", "initialize", &["int", "java.security.SecureRandom"]), Arg(0)),
                c("15.6", sig("java.security.KeyPairGenerator", "void", "initialize", &["java.security.spec.AlgorithmParameterSpec"]), Arg(0)),
                c("15.7", sig("java.security.KeyPairGenerator", "void", "initialize", &["java.security.spec.AlgorithmParameterSpec", "java.security.SecureRandom"]), Arg(0)),
            ],
            insecure_names: vec!["RSA", "DSA", "DH", "EC"],
            thresholds: vec![("RSA", 2048), ("DSA", 2048), ("DH", 2048), ("EC", 224)],
        },
        RuleSpec {
            id: 16,
            title: "Insecure cryptographic hash",
            severity: Severity::H,
            plan: AnalysisPlan::InterBackward,
            criteria: vec![
                c("16.1", sig("java.security.MessageDigest", "java.security.MessageDigest", "getInstance", &["java.lang.String"]), Arg(0)),
                c("16.2", sig("java.security.MessageDigest", "java.security.MessageDigest", "getInstance", &["java.lang.String", "java.lang.String"]), Arg(0)),
                c("16.3", sig("java.security.MessageDigest", "java.security.MessageDigest", "getInstance", &["java.lang.String", "java.security.Provider"]), Arg(0)),
            ],
            insecure_names: vec!["MD2", "MD4", "MD5", "SHA-1", "SHA1"],
            thresholds: vec![],
        },
    ]
}

pub fn rule(id: u8) -> Option<RuleSpec> {
    registry().into_iter().find(|r| r.id == id)
}

/// Execution order per run: rule 7 last (budget expiry drops it first).
pub fn execution_order(subset: &BTreeSet<u8>) -> Vec<u8> {
    let mut order: Vec<u8> = (1..=16).filter(|id| *id != 7).collect();
    order.push(7);
    order.retain(|id| subset.contains(id));
    order
}

/// A reported misuse.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct Finding {
    pub rule_id: u8,
    pub severity: Severity,
    pub file: String,
    pub class: String,
    pub method: String,
    pub line: u32,
    pub evidence: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_subproject: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn severity_table() {
        let want = [
            (1, Severity::H),
            (2, Severity::H),
            (3, Severity::H),
            (4, Severity::H),
            (5, Severity::H),
            (6, Severity::H),
            (7, Severity::H),
            (8, Severity::M),
            (9, Severity::M),
            (10, Severity::M),
            (11, Severity::M),
            (12, Severity::M),
            (13, Severity::L),
            (14, Severity::L),
            (15, Severity::L),
            (16, Severity::H),
        ];
        let reg = registry();
        assert_eq!(reg.len(), 16);
        for (id, sev) in want {
            assert_eq!(reg.iter().find(|r| r.id == id).unwrap().severity, sev, "rule {id}");
        }
    }

    #[test]
    fn data_only_rules_are_the_eight_marked_ones() {
        let reg = registry();
        let marked: Vec<u8> = reg.iter().filter(|r| r.uses_data_only_tracking()).map(|r| r.id).collect();
        assert_eq!(marked, vec![1, 2, 3, 8, 10, 12, 13, 15]);
    }

    #[test]
    fn execution_order_puts_rule_7_last() {
        let all: BTreeSet<u8> = (1..=16).collect();
        let order = execution_order(&all);
        assert_eq!(order.first(), Some(&1));
        assert_eq!(order.last(), Some(&7));
        assert_eq!(order.len(), 16);
        let some: BTreeSet<u8> = [4, 7, 9].into_iter().collect();
        assert_eq!(execution_order(&some), vec![4, 9, 7]);
    }
}
