//! Provenance export and import.
//!
//! A theory serializes to a JSON document with five top-level keys, in
//! this order: `theory`, `assertions`, `rules`, `derivations`,
//! `arguments`. Propositions appear in their printed surface form, ids in
//! their printed form (`a0`, `r1`, `d2`, `arg3`). Derivation nodes carry
//! `id`, `conclusion`, `rule`, `premises`, `depth`; nodes from a
//! hypothetical subproof add a `hypotheses` list, and rule applications
//! add `via` naming the entailment rule. Plans and probability constraints
//! travel in KB text, not here.
//!
//! Importing rebuilds a fresh theory under the same name with identical
//! ids; every derivation is re-validated against the ledger as it grows,
//! so a tampered document is rejected rather than trusted.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::parse::{parse_prop, ParseError};
use crate::prop::Prop;
use crate::theory::{
    ArgTarget, Argument, ArgumentId, Assertion, AssertionId, Derivation, DerivationId,
    EntailmentRule, Polarity, RuleId, RuleTag, StoreError, Support, TheoryId, TheoryStore,
};

#[derive(Debug)]
pub enum ExportError {
    Io(std::io::Error),
    Store(StoreError),
    Parse(ParseError),
    /// The document is syntactically JSON but not a provenance ledger.
    Malformed(String),
}

impl fmt::Display for ExportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExportError::Io(e) => write!(f, "i/o error: {e}"),
            ExportError::Store(e) => e.fmt(f),
            ExportError::Parse(e) => e.fmt(f),
            ExportError::Malformed(m) => write!(f, "malformed provenance document: {m}"),
        }
    }
}

impl std::error::Error for ExportError {}

impl From<std::io::Error> for ExportError {
    fn from(e: std::io::Error) -> ExportError {
        ExportError::Io(e)
    }
}

impl From<StoreError> for ExportError {
    fn from(e: StoreError) -> ExportError {
        ExportError::Store(e)
    }
}

impl From<ParseError> for ExportError {
    fn from(e: ParseError) -> ExportError {
        ExportError::Parse(e)
    }
}

#[derive(Serialize, Deserialize)]
struct ProvenanceDoc {
    theory: String,
    assertions: Vec<AssertionJson>,
    rules: Vec<RuleJson>,
    derivations: Vec<DerivationJson>,
    arguments: Vec<ArgumentJson>,
}

#[derive(Serialize, Deserialize)]
struct AssertionJson {
    id: String,
    prop: String,
    source: String,
}

#[derive(Serialize, Deserialize)]
struct RuleJson {
    id: String,
    premises: Vec<String>,
    conclusion: String,
}

#[derive(Serialize, Deserialize)]
struct DerivationJson {
    id: String,
    conclusion: String,
    rule: String,
    premises: Vec<String>,
    depth: u32,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    hypotheses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    via: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TargetJson {
    Prop(String),
    Argument(String),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SupportJson {
    Derivation(String),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct ArgumentJson {
    id: String,
    target: TargetJson,
    polarity: String,
    support: SupportJson,
    author: String,
}

/// Render a theory's provenance ledger as a JSON string. Assertions and
/// rules are the theory's visible content, so a derived theory exports
/// what it actually sees.
pub fn provenance_json(store: &TheoryStore, t: TheoryId) -> Result<String, StoreError> {
    let content = store.visible(t)?;
    let theory = store.theory(t)?;
    let doc = ProvenanceDoc {
        theory: theory.name.to_string(),
        assertions: content
            .assertions
            .iter()
            .map(|a| AssertionJson {
                id: a.id.to_string(),
                prop: a.prop.to_string(),
                source: a.source.clone(),
            })
            .collect(),
        rules: content
            .rules
            .iter()
            .map(|r| RuleJson {
                id: r.id.to_string(),
                premises: r.premises.iter().map(Prop::to_string).collect(),
                conclusion: r.conclusion.to_string(),
            })
            .collect(),
        derivations: theory
            .derivations
            .iter()
            .map(|d| DerivationJson {
                id: d.id.to_string(),
                conclusion: d.conclusion.to_string(),
                rule: d.rule.name().to_string(),
                premises: d.premises.iter().map(DerivationId::to_string).collect(),
                depth: d.depth,
                hypotheses: d.hypotheses.iter().map(Prop::to_string).collect(),
                via: d.via.map(|r| r.to_string()),
            })
            .collect(),
        arguments: theory
            .arguments
            .iter()
            .map(|a| ArgumentJson {
                id: a.id.to_string(),
                target: match &a.target {
                    ArgTarget::Prop(p) => TargetJson::Prop(p.to_string()),
                    ArgTarget::Argument(id) => TargetJson::Argument(id.to_string()),
                },
                polarity: a.polarity.name().to_string(),
                support: match &a.support {
                    Support::Derivation(id) => SupportJson::Derivation(id.to_string()),
                    Support::Text(s) => SupportJson::Text(s.clone()),
                },
                author: a.author.clone(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc).expect("provenance serializes"))
}

/// Write a theory's provenance to `out`; returns the byte count written.
pub fn export_provenance(
    store: &TheoryStore,
    t: TheoryId,
    out: &mut dyn Write,
) -> Result<u64, ExportError> {
    let json = provenance_json(store, t)?;
    out.write_all(json.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(json.len() as u64 + 1)
}

fn parse_id(s: &str, prefix: &str) -> Result<u64, ExportError> {
    s.strip_prefix(prefix)
        .and_then(|digits| digits.parse::<u64>().ok())
        .ok_or_else(|| ExportError::Malformed(format!("bad id `{s}`, wanted `{prefix}N`")))
}

/// Rebuild a theory from an exported document. The name must be free in
/// the store; ids are preserved and the id counters advance past them.
pub fn import_provenance(store: &mut TheoryStore, json: &str) -> Result<TheoryId, ExportError> {
    let doc: ProvenanceDoc =
        serde_json::from_str(json).map_err(|e| ExportError::Malformed(e.to_string()))?;
    let t = store.create_theory(doc.theory.as_str())?;
    for a in &doc.assertions {
        store.insert_assertion_raw(
            t,
            Assertion {
                id: AssertionId(parse_id(&a.id, "a")?),
                prop: parse_prop(&a.prop)?,
                source: a.source.clone(),
            },
        )?;
    }
    for r in &doc.rules {
        let premises = r
            .premises
            .iter()
            .map(|p| parse_prop(p))
            .collect::<Result<Vec<_>, _>>()?;
        store.insert_rule_raw(
            t,
            EntailmentRule {
                id: RuleId(parse_id(&r.id, "r")?),
                premises,
                conclusion: parse_prop(&r.conclusion)?,
                theory: t,
            },
        )?;
    }
    let mut derivations = doc
        .derivations
        .iter()
        .map(|d| {
            Ok(Derivation {
                id: DerivationId(parse_id(&d.id, "d")?),
                conclusion: parse_prop(&d.conclusion)?,
                rule: RuleTag::from_name(&d.rule).ok_or_else(|| {
                    ExportError::Malformed(format!("unknown inference rule `{}`", d.rule))
                })?,
                premises: d
                    .premises
                    .iter()
                    .map(|p| parse_id(p, "d").map(DerivationId))
                    .collect::<Result<Vec<_>, _>>()?,
                theory: t,
                depth: d.depth,
                hypotheses: d
                    .hypotheses
                    .iter()
                    .map(|h| parse_prop(h).map_err(ExportError::from))
                    .collect::<Result<Vec<_>, _>>()?,
                via: match &d.via {
                    Some(v) => Some(RuleId(parse_id(v, "r")?)),
                    None => None,
                },
            })
        })
        .collect::<Result<Vec<_>, ExportError>>()?;
    derivations.sort_by_key(|d| d.id);
    for d in derivations {
        store.insert_derivation_raw(t, d)?;
    }
    for a in &doc.arguments {
        let polarity = match a.polarity.as_str() {
            "pro" => Polarity::Pro,
            "con" => Polarity::Con,
            other => {
                return Err(ExportError::Malformed(format!("unknown polarity `{other}`")))
            }
        };
        store.insert_argument_raw(
            t,
            Argument {
                id: ArgumentId(parse_id(&a.id, "arg")?),
                target: match &a.target {
                    TargetJson::Prop(p) => ArgTarget::Prop(parse_prop(p)?),
                    TargetJson::Argument(id) => {
                        ArgTarget::Argument(ArgumentId(parse_id(id, "arg")?))
                    }
                },
                polarity,
                support: match &a.support {
                    SupportJson::Derivation(id) => {
                        Support::Derivation(DerivationId(parse_id(id, "d")?))
                    }
                    SupportJson::Text(s) => Support::Text(s.clone()),
                },
                author: a.author.clone(),
            },
        )?;
    }
    Ok(t)
}
