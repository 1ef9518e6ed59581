//! JSON documents: parsing with schema checks, and canonical emission.
//!
//! Field elements are written as an integer (prime-field value), a flat
//! array of F_q coordinates when q is prime, or nested coordinate arrays.
//! All coefficient arrays are constant term first.

use std::fs;

use drinfeld_core::sheaves::{AbelianSheafLadder, Level, SplittingType};
use drinfeld_core::shtuka::{Orientation, Point, Shtuka};
use drinfeld_core::{
    CoverMap, DrinfeldModule, FieldElement, FieldTower, Poly, PolyMatrix, RingTag, SkewPoly,
};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug)]
pub enum Document {
    Field(FieldTower),
    Module(DrinfeldModule),
    Cover(CoverMap),
    Sheaf(AbelianSheafLadder),
    Shtuka(Shtuka),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Field(_) => "field",
            Document::Module(_) => "drinfeld_module",
            Document::Cover(_) => "cover",
            Document::Sheaf(_) => "abelian_sheaf",
            Document::Shtuka(_) => "shtuka",
        }
    }
}

/// A parsed input file.
#[derive(Debug)]
pub struct Input {
    pub path: String,
    pub sha256: String,
    pub documents: Vec<Document>,
}

pub fn load(path: &str) -> Result<Input, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let documents = parse(&value, None, "$").map_err(|e| e.in_file(path))?;
    Ok(Input { path: path.into(), sha256, documents })
}

/// Parses one document; a job expands into its items, which inherit the
/// job's field.
pub fn parse(v: &Value, inherited: Option<&FieldTower>, at: &str) -> Result<Vec<Document>, CliError> {
    let obj = v.as_object().ok_or_else(|| schema(at, "expected an object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| schema(at, "missing string field \"kind\""))?;
    let allowed: &[&str] = match kind {
        "field" => &["kind", "p", "base_modulus", "ext_modulus"],
        "drinfeld_module" => &["kind", "field", "ring", "gen_image", "rank", "characteristic"],
        "cover" => &["kind", "field", "p_poly"],
        "abelian_sheaf" => &["kind", "field", "rank", "dim", "period", "twist", "characteristic", "levels"],
        "shtuka" => &[
            "kind", "field", "orientation", "rank", "dim", "pole", "zero", "splits_E", "splits_Eprime", "J", "T",
        ],
        "job" => &["kind", "field", "items"],
        other => return Err(schema(at, &format!("unknown kind \"{other}\""))),
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(at, &format!("unexpected key \"{k}\" for kind \"{kind}\"")));
    }
    if kind == "field" {
        return Ok(vec![Document::Field(parse_field(v, at)?)]);
    }
    let own;
    let tower = match obj.get("field") {
        Some(f) => {
            own = parse_field(f, &format!("{at}.field"))?;
            Some(&own)
        }
        None => inherited,
    };
    if kind == "job" {
        let items = array(get(obj, "items", at)?, &format!("{at}.items"))?;
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            out.extend(parse(item, tower, &format!("{at}.items[{i}]"))?);
        }
        return Ok(out);
    }
    let t = tower.ok_or_else(|| schema(at, "missing \"field\" (and no enclosing job supplies one)"))?;
    let doc = match kind {
        "drinfeld_module" => Document::Module(parse_module(obj, t, at)?),
        "cover" => {
            let p = poly(t, get(obj, "p_poly", at)?, &format!("{at}.p_poly"))?;
            Document::Cover(CoverMap::new(p).map_err(|e| schema(at, &e.to_string()))?)
        }
        "abelian_sheaf" => Document::Sheaf(parse_sheaf(obj, t, at)?),
        _ => Document::Shtuka(parse_shtuka(obj, t, at)?),
    };
    Ok(vec![doc])
}

fn schema(at: &str, msg: &str) -> CliError {
    CliError::Schema { path: None, at: at.into(), msg: msg.into() }
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| schema(at, &format!("missing field \"{key}\"")))
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| schema(at, "expected an array"))
}

fn integer(v: &Value, at: &str) -> Result<i64, CliError> {
    v.as_i64().ok_or_else(|| schema(at, "expected an integer"))
}

fn count(v: &Value, at: &str) -> Result<usize, CliError> {
    let n = integer(v, at)?;
    usize::try_from(n).map_err(|_| schema(at, "expected a nonnegative integer"))
}

fn ints(v: &Value, at: &str) -> Result<Vec<i64>, CliError> {
    array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, x)| integer(x, &format!("{at}[{i}]")))
        .collect()
}

fn digits(v: &Value, p: u32, at: &str) -> Result<Vec<u32>, CliError> {
    Ok(ints(v, at)?.into_iter().map(|d| d.rem_euclid(p as i64) as u32).collect())
}

fn parse_field(v: &Value, at: &str) -> Result<FieldTower, CliError> {
    let obj = v.as_object().ok_or_else(|| schema(at, "expected a field object"))?;
    if let Some(k) = obj.keys().find(|k| !["kind", "p", "base_modulus", "ext_modulus"].contains(&k.as_str())) {
        return Err(schema(at, &format!("unexpected key \"{k}\" in field")));
    }
    let p = u32::try_from(integer(get(obj, "p", at)?, &format!("{at}.p"))?)
        .map_err(|_| schema(at, "p out of range"))?;
    if p < 2 {
        return Err(schema(at, "p must be a prime"));
    }
    let base = match obj.get("base_modulus") {
        Some(b) => digits(b, p, &format!("{at}.base_modulus"))?,
        None => vec![0, 1],
    };
    let ext = match obj.get("ext_modulus") {
        Some(e) => array(e, &format!("{at}.ext_modulus"))?
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let here = format!("{at}.ext_modulus[{i}]");
                match c {
                    Value::Array(_) => digits(c, p, &here),
                    _ => Ok(vec![integer(c, &here)?.rem_euclid(p as i64) as u32]),
                }
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![vec![0], vec![1]],
    };
    FieldTower::new(p, &base, &ext).map_err(|e| schema(at, &e.to_string()))
}

pub fn element(t: &FieldTower, v: &Value, at: &str) -> Result<FieldElement, CliError> {
    let p = t.characteristic() as i64;
    let (e, m) = (t.base_degree(), t.degree());
    let coeff = |c: &Value, here: &str| -> Result<Vec<u32>, CliError> {
        let d = match c {
            Value::Array(_) => digits(c, p as u32, here)?,
            _ => vec![integer(c, here)?.rem_euclid(p) as u32],
        };
        if d.len() > e {
            return Err(schema(here, &format!("more than {e} coordinates over F_p")));
        }
        Ok(d)
    };
    let coords = match v {
        Value::Array(items) => {
            if items.len() > m {
                return Err(schema(at, &format!("more than {m} coordinates over F_q")));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, c)| coeff(c, &format!("{at}[{i}]")))
                .collect::<Result<Vec<_>, _>>()?
        }
        _ => vec![coeff(v, at)?],
    };
    t.from_coords(&coords).map_err(|err| schema(at, &err.to_string()))
}

fn elements(t: &FieldTower, v: &Value, at: &str) -> Result<Vec<FieldElement>, CliError> {
    array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, x)| element(t, x, &format!("{at}[{i}]")))
        .collect()
}

fn poly(t: &FieldTower, v: &Value, at: &str) -> Result<Poly, CliError> {
    Ok(Poly::new(t, elements(t, v, at)?))
}

fn matrix(t: &FieldTower, v: &Value, rank: usize, at: &str) -> Result<PolyMatrix, CliError> {
    let rows = array(v, at)?;
    if rows.len() != rank {
        return Err(schema(at, &format!("expected {rank} rows")));
    }
    let mut entries = Vec::with_capacity(rank * rank);
    for (i, row) in rows.iter().enumerate() {
        let row = array(row, &format!("{at}[{i}]"))?;
        if row.len() != rank {
            return Err(schema(&format!("{at}[{i}]"), &format!("expected {rank} entries")));
        }
        for (j, f) in row.iter().enumerate() {
            entries.push(poly(t, f, &format!("{at}[{i}][{j}]"))?);
        }
    }
    Ok(PolyMatrix::new(t, rank, rank, entries))
}

fn splits(v: &Value, rank: usize, at: &str) -> Result<SplittingType, CliError> {
    let degs = ints(v, at)?;
    if degs.len() != rank {
        return Err(schema(at, &format!("expected {rank} degrees")));
    }
    Ok(SplittingType::new(degs))
}

fn parse_module(obj: &Map<String, Value>, t: &FieldTower, at: &str) -> Result<DrinfeldModule, CliError> {
    let ring = match get(obj, "ring", at)?.as_str() {
        Some("A") => RingTag::A,
        Some("Aprime") => RingTag::APrime,
        _ => return Err(schema(&format!("{at}.ring"), "expected \"A\" or \"Aprime\"")),
    };
    let gen = SkewPoly::new(t, elements(t, get(obj, "gen_image", at)?, &format!("{at}.gen_image"))?);
    let rank = count(get(obj, "rank", at)?, &format!("{at}.rank"))?;
    let xi = element(t, get(obj, "characteristic", at)?, &format!("{at}.characteristic"))?;
    Ok(DrinfeldModule::new(ring, gen, rank, xi))
}

fn parse_sheaf(obj: &Map<String, Value>, t: &FieldTower, at: &str) -> Result<AbelianSheafLadder, CliError> {
    let rank = count(get(obj, "rank", at)?, &format!("{at}.rank"))?;
    let dim = count(get(obj, "dim", at)?, &format!("{at}.dim"))?;
    let period = count(get(obj, "period", at)?, &format!("{at}.period"))?;
    let twist = integer(get(obj, "twist", at)?, &format!("{at}.twist"))?;
    let xi = element(t, get(obj, "characteristic", at)?, &format!("{at}.characteristic"))?;
    let levels = array(get(obj, "levels", at)?, &format!("{at}.levels"))?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let here = format!("{at}.levels[{i}]");
            let lo = l.as_object().ok_or_else(|| schema(&here, "expected an object"))?;
            if let Some(k) = lo.keys().find(|k| !["splits", "Pi", "tau"].contains(&k.as_str())) {
                return Err(schema(&here, &format!("unexpected key \"{k}\"")));
            }
            Ok(Level {
                splits: splits(get(lo, "splits", &here)?, rank, &format!("{here}.splits"))?,
                pi: matrix(t, get(lo, "Pi", &here)?, rank, &format!("{here}.Pi"))?,
                tau: matrix(t, get(lo, "tau", &here)?, rank, &format!("{here}.tau"))?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    AbelianSheafLadder::new(rank, dim, period, twist, xi, levels).map_err(|e| schema(at, &e.to_string()))
}

fn point(t: &FieldTower, v: &Value, at: &str) -> Result<Point, CliError> {
    match v.as_str() {
        Some("infinity") => Ok(Point::Infinity),
        Some(_) => Err(schema(at, "expected a field element or \"infinity\"")),
        None => Ok(Point::Affine(element(t, v, at)?)),
    }
}

fn parse_shtuka(obj: &Map<String, Value>, t: &FieldTower, at: &str) -> Result<Shtuka, CliError> {
    let orientation = match get(obj, "orientation", at)?.as_str() {
        Some("right") => Orientation::Right,
        Some("left") => Orientation::Left,
        _ => return Err(schema(&format!("{at}.orientation"), "expected \"right\" or \"left\"")),
    };
    let rank = count(get(obj, "rank", at)?, &format!("{at}.rank"))?;
    if rank == 0 {
        return Err(schema(&format!("{at}.rank"), "rank must be positive"));
    }
    Ok(Shtuka {
        orientation,
        rank,
        dim: count(get(obj, "dim", at)?, &format!("{at}.dim"))?,
        pole: point(t, get(obj, "pole", at)?, &format!("{at}.pole"))?,
        zero: point(t, get(obj, "zero", at)?, &format!("{at}.zero"))?,
        split_e: splits(get(obj, "splits_E", at)?, rank, &format!("{at}.splits_E"))?,
        split_e_prime: splits(get(obj, "splits_Eprime", at)?, rank, &format!("{at}.splits_Eprime"))?,
        j: matrix(t, get(obj, "J", at)?, rank, &format!("{at}.J"))?,
        t: matrix(t, get(obj, "T", at)?, rank, &format!("{at}.T"))?,
    })
}

// ---------------------------------------------------------------------------

pub fn field_json(t: &FieldTower) -> Value {
    let ext: Vec<Value> = t
        .ext_modulus_coords()
        .into_iter()
        .map(|c| if t.base_degree() == 1 { json!(c[0]) } else { json!(c) })
        .collect();
    json!({ "p": t.characteristic(), "base_modulus": t.base_modulus(), "ext_modulus": ext })
}

pub fn element_json(t: &FieldTower, a: FieldElement) -> Value {
    let coords = t.coords(a);
    match (t.base_degree(), t.degree()) {
        (1, 1) => json!(coords[0][0]),
        (1, _) => json!(coords.iter().map(|c| c[0]).collect::<Vec<_>>()),
        _ => json!(coords),
    }
}

pub fn poly_json(f: &Poly) -> Value {
    let t = f.tower();
    Value::Array(f.coeffs().iter().map(|&c| element_json(t, c)).collect())
}

pub fn skew_json(f: &SkewPoly) -> Value {
    let t = f.tower();
    Value::Array(f.coeffs().iter().map(|&c| element_json(t, c)).collect())
}

pub fn matrix_json(m: &PolyMatrix) -> Value {
    Value::Array(
        m.row_vecs()
            .iter()
            .map(|row| Value::Array(row.iter().map(poly_json).collect()))
            .collect(),
    )
}

fn point_json(t: &FieldTower, p: Point) -> Value {
    match p {
        Point::Affine(a) => element_json(t, a),
        Point::Infinity => json!("infinity"),
    }
}

/// The canonical JSON form of a document, field included.
pub fn document_json(doc: &Document) -> Value {
    match doc {
        Document::Field(t) => {
            let mut v = field_json(t);
            v["kind"] = json!("field");
            v
        }
        Document::Module(m) => json!({
            "kind": "drinfeld_module",
            "field": field_json(m.tower()),
            "ring": match m.ring() { RingTag::A => "A", RingTag::APrime => "Aprime" },
            "gen_image": skew_json(m.gen_image()),
            "rank": m.rank(),
            "characteristic": element_json(m.tower(), m.characteristic()),
        }),
        Document::Cover(c) => json!({
            "kind": "cover",
            "field": field_json(c.poly().tower()),
            "p_poly": poly_json(c.poly()),
        }),
        Document::Sheaf(l) => json!({
            "kind": "abelian_sheaf",
            "field": field_json(l.tower()),
            "rank": l.rank(),
            "dim": l.dim(),
            "period": l.period(),
            "twist": l.twist(),
            "characteristic": element_json(l.tower(), l.characteristic()),
            "levels": l.levels().iter().map(|lv| json!({
                "splits": lv.splits.degs,
                "Pi": matrix_json(&lv.pi),
                "tau": matrix_json(&lv.tau),
            })).collect::<Vec<_>>(),
        }),
        Document::Shtuka(s) => {
            let t = s.tower();
            json!({
                "kind": "shtuka",
                "field": field_json(t),
                "orientation": match s.orientation { Orientation::Right => "right", Orientation::Left => "left" },
                "rank": s.rank,
                "dim": s.dim,
                "pole": point_json(t, s.pole),
                "zero": point_json(t, s.zero),
                "splits_E": s.split_e.degs,
                "splits_Eprime": s.split_e_prime.degs,
                "J": matrix_json(&s.j),
                "T": matrix_json(&s.t),
            })
        }
    }
}
