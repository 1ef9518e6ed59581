use drinfeld_core::drinfeld::{aut_group, iso_solver, twist_min_degree};
use drinfeld_core::extend::{
    brute_oracle, enumerate_extensions, extension_iso_classes, galois_merge_report, ExtensionProblem,
};
use drinfeld_core::sheaves::{
    enumerate_sheaf_module_structures, from_drinfeld, module_structure_isomorphisms, pushforward,
    semilinear_iso_solver, verify_abelian_sheaf, AbelianSheafLadder,
};
use drinfeld_core::shtuka::{
    from_abelian_sheaf, pushforward_shtuka, shtuka_iso_solver, verify_shtuka, Shtuka,
};
use drinfeld_core::{
    Caps, CoverMap, DrinfeldModule, FieldTower, Poly, RingTag, SkewPoly, VerificationReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::document::{document_json, element_json, matrix_json, skew_json, Document, Input};
use crate::error::CliError;
use crate::report::Report;

fn documents(inputs: &[Input]) -> Vec<&Document> {
    inputs.iter().flat_map(|i| i.documents.iter()).collect()
}

/// The single cover and the mathematical objects among the inputs.
fn split_cover<'a>(docs: &[&'a Document]) -> Result<(Option<&'a CoverMap>, Vec<&'a Document>), CliError> {
    let covers: Vec<&CoverMap> = docs
        .iter()
        .filter_map(|d| match d {
            Document::Cover(c) => Some(c),
            _ => None,
        })
        .collect();
    if covers.len() > 1 {
        return Err(CliError::Usage("more than one cover supplied".into()));
    }
    let objects = docs
        .iter()
        .copied()
        .filter(|d| !matches!(d, Document::Cover(_) | Document::Field(_)))
        .collect();
    Ok((covers.first().copied(), objects))
}

fn need_cover<'a>(cover: Option<&'a CoverMap>) -> Result<&'a CoverMap, CliError> {
    cover.ok_or_else(|| CliError::Usage("a cover document is required".into()))
}

fn exactly<'a>(objects: Vec<&'a Document>, n: usize, what: &str) -> Result<Vec<&'a Document>, CliError> {
    if objects.len() != n {
        return Err(CliError::Usage(format!("expected {what}, got {} objects", objects.len())));
    }
    Ok(objects)
}

fn one_module<'a>(objects: Vec<&'a Document>) -> Result<&'a DrinfeldModule, CliError> {
    match exactly(objects, 1, "one drinfeld_module")?[0] {
        Document::Module(m) => Ok(m),
        other => Err(CliError::Usage(format!("expected a drinfeld_module, got {}", other.kind()))),
    }
}

fn verification_of(doc: &Document) -> VerificationReport {
    match doc {
        Document::Field(t) => {
            let mut rep = VerificationReport::new(format!("field of size {}", t.size()));
            rep.check(
                "moduli are irreducible",
                true,
                format!("q = {}, degree {} over F_q", t.q(), t.degree()),
            );
            rep
        }
        Document::Cover(c) => {
            let mut rep = VerificationReport::new(format!("cover x = {}", c.poly().display("y")));
            rep.check("p is monic with coefficients in F_q", true, format!("degree {}", c.degree()));
            rep
        }
        Document::Module(m) => m.verify_standard_form(),
        Document::Sheaf(l) => verify_abelian_sheaf(l),
        Document::Shtuka(s) => verify_shtuka(s),
    }
}

pub fn verify(mut report: Report, inputs: &[Input]) -> Result<Report, CliError> {
    for doc in documents(inputs) {
        let rep = verification_of(doc);
        report.line(format!("{}: {}", doc.kind(), if rep.passed() { "pass" } else { "FAIL" }));
        report.transcript(rep);
    }
    Ok(report)
}

/// Restriction of coefficients for modules, pushforward for ladders and shtukas.
pub fn push(mut report: Report, inputs: &[Input]) -> Result<(Report, Option<Value>), CliError> {
    let docs = documents(inputs);
    let (cover, objects) = split_cover(&docs)?;
    let cover = need_cover(cover)?;
    let object = exactly(objects, 1, "one object to push forward")?[0];
    let input_rep = verification_of(object);
    if !input_rep.passed() {
        report.line(format!("input {} fails verification; nothing pushed", object.kind()));
        report.transcript(input_rep);
        return Ok((report, None));
    }
    let pushed = match object {
        Document::Module(m) => {
            if m.ring() != RingTag::APrime {
                return Err(CliError::Usage("restriction needs a module over F_q[y] (ring \"Aprime\")".into()));
            }
            Document::Module(m.restrict(cover)?)
        }
        Document::Sheaf(l) => Document::Sheaf(pushforward(l, cover)?),
        Document::Shtuka(s) => Document::Shtuka(pushforward_shtuka(s, cover)?),
        _ => unreachable!("fields and covers are filtered out"),
    };
    let rep = verification_of(&pushed);
    report.line(format!("pushed {} along x = {}", object.kind(), cover.poly().display("y")));
    if let Document::Module(m) = &pushed {
        report.line(format!("x ↦ {}", m.gen_image()));
    }
    report.transcript(rep);
    let doc = document_json(&pushed);
    report.documents.push(doc.clone());
    Ok((report, Some(doc)))
}

pub fn extend(
    mut report: Report,
    inputs: &[Input],
    caps: Caps,
    classes: bool,
    galois: Option<usize>,
) -> Result<Report, CliError> {
    let docs = documents(inputs);
    let (cover, objects) = split_cover(&docs)?;
    let cover = need_cover(cover)?;
    let module = one_module(objects)?;
    let rep = module.verify_standard_form();
    if !rep.passed() {
        report.line("base module fails verification");
        report.transcript(rep);
        return Ok(report);
    }
    let prob = ExtensionProblem::with_inferred_rank(module.clone(), cover.clone())?.with_caps(caps);
    let sols = enumerate_extensions(&prob)?;
    let aut = aut_group(prob.base())?;
    if sols.is_empty() {
        report.line("no extensions");
    } else {
        report.line(format!("{} extensions of rank {}:", sols.len(), prob.target_rank()));
        for (k, s) in sols.iter().enumerate() {
            report.line(format!("  [{k}] y ↦ {}", s.delta));
        }
    }
    report.line(format!("automorphism group of order {}", aut.order()));
    let mut result = json!({
        "solutions": sols.iter().map(|s| skew_json(&s.delta)).collect::<Vec<_>>(),
        "aut_order": aut.order(),
    });
    if classes {
        let cl = extension_iso_classes(&prob, &sols)?;
        report.line(format!("{} isomorphism classes: {:?}", cl.len(), cl));
        result["classes"] = json!(cl);
    }
    if let Some(s_max) = galois {
        let rows = galois_merge_report(&prob, s_max)?;
        let mut table = Vec::new();
        for r in &rows {
            report.line(format!(
                "degree {} (field of size {}): {} solutions, {} classes",
                r.degree, r.field_size, r.solutions, r.classes
            ));
            table.push(json!({
                "degree": r.degree,
                "field_size": r.field_size,
                "solutions": r.solutions,
                "classes": r.classes,
            }));
        }
        result["galois"] = json!(table);
    }
    report.result = result;
    Ok(report)
}

fn ladder_iso_json(maps: &[drinfeld_core::PolyMatrix]) -> Value {
    Value::Array(maps.iter().map(matrix_json).collect())
}

/// Witnesses as JSON values, plus a one-line rendering of each.
fn isomorphisms(a: &Document, b: &Document, caps: &Caps) -> Result<Vec<(Value, String)>, CliError> {
    Ok(match (a, b) {
        (Document::Module(m1), Document::Module(m2)) => {
            let t = m1.tower();
            iso_solver(m1, m2)?
                .into_iter()
                .map(|e| (element_json(t, e), format!("ε = {}", t.format(e))))
                .collect()
        }
        (Document::Sheaf(l1), Document::Sheaf(l2)) => semilinear_iso_solver(l1, l2, caps)?
            .into_iter()
            .map(|iso| {
                let text = iso.maps.iter().map(|u| u.display("x")).collect::<Vec<_>>().join(", ");
                (ladder_iso_json(&iso.maps), format!("U = ({text})"))
            })
            .collect(),
        (Document::Shtuka(s1), Document::Shtuka(s2)) => shtuka_iso_solver(s1, s2, caps)?
            .into_iter()
            .map(|iso| {
                (
                    json!({ "U": matrix_json(&iso.u), "Uprime": matrix_json(&iso.u_prime) }),
                    format!("U = {}, U' = {}", iso.u.display("x"), iso.u_prime.display("x")),
                )
            })
            .collect(),
        _ => {
            return Err(CliError::Usage(format!(
                "cannot compare {} with {}",
                a.kind(),
                b.kind()
            )))
        }
    })
}

fn tower_of(d: &Document) -> &FieldTower {
    match d {
        Document::Field(t) => t,
        Document::Module(m) => m.tower(),
        Document::Cover(c) => c.poly().tower(),
        Document::Sheaf(l) => l.tower(),
        Document::Shtuka(s) => s.tower(),
    }
}

/// Smallest `s ≤ s_max` with an isomorphism over the degree-`s` extension.
fn twist_degree(a: &Document, b: &Document, s_max: usize, caps: &Caps) -> Result<Option<usize>, CliError> {
    if let (Document::Module(m1), Document::Module(m2)) = (a, b) {
        return Ok(twist_min_degree(m1, m2, s_max, caps.field_size)?);
    }
    for s in 1..=s_max {
        let ext = tower_of(a).extension(s, caps.field_size)?;
        let found = match (a, b) {
            (Document::Sheaf(l1), Document::Sheaf(l2)) => {
                !semilinear_iso_solver(&l1.base_change(&ext)?, &l2.base_change(&ext)?, caps)?.is_empty()
            }
            (Document::Shtuka(s1), Document::Shtuka(s2)) => {
                !shtuka_iso_solver(&s1.base_change(&ext)?, &s2.base_change(&ext)?, caps)?.is_empty()
            }
            _ => return Err(CliError::Usage(format!("cannot compare {} with {}", a.kind(), b.kind()))),
        };
        if found {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

fn pair<'a>(inputs: &'a [Input]) -> Result<(&'a Document, &'a Document), CliError> {
    let docs = documents(inputs);
    let (_, objects) = split_cover(&docs)?;
    let objects = exactly(objects, 2, "two objects of the same kind")?;
    Ok((objects[0], objects[1]))
}

pub fn isom(mut report: Report, inputs: &[Input], caps: Caps, twist: Option<usize>) -> Result<Report, CliError> {
    let (a, b) = pair(inputs)?;
    let found = isomorphisms(a, b, &caps)?;
    let mut result = json!({ "isomorphisms": found.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>() });
    if found.is_empty() {
        match twist {
            Some(s_max) => {
                let s = twist_degree(a, b, s_max, &caps)?;
                match s {
                    Some(s) => report.line(format!("no isomorphism; minimal twist degree {s}")),
                    None => report.line(format!("no isomorphism; none over extensions of degree ≤ {s_max}")),
                }
                result["twist_degree"] = json!(s);
            }
            None => report.line("no isomorphism"),
        }
    } else {
        report.line(format!("{} isomorphisms", found.len()));
        for (_, text) in &found {
            report.line(format!("  {text}"));
        }
    }
    report.result = result;
    Ok(report)
}

pub fn twist(mut report: Report, inputs: &[Input], caps: Caps, s_max: usize) -> Result<Report, CliError> {
    let (a, b) = pair(inputs)?;
    let s = twist_degree(a, b, s_max, &caps)?;
    match s {
        Some(s) => report.line(format!("minimal twist degree {s}")),
        None => report.line(format!("not isomorphic over any extension of degree ≤ {s_max}")),
    }
    report.result = json!({ "twist_degree": s, "s_max": s_max });
    Ok(report)
}

pub fn aut(mut report: Report, inputs: &[Input]) -> Result<Report, CliError> {
    let docs = documents(inputs);
    let (_, objects) = split_cover(&docs)?;
    let m = one_module(objects)?;
    let g = aut_group(m)?;
    let t = m.tower();
    let mut rep = VerificationReport::new(format!("automorphism group of order {}", g.order()));
    rep.check("contains the identity", g.contains_identity, "");
    rep.check("closed under products", g.closed_under_products, "");
    rep.check("closed under inverses", g.closed_under_inverses, "");
    report.line(format!(
        "Aut = {{{}}}",
        g.elements.iter().map(|&e| t.format(e)).collect::<Vec<_>>().join(", ")
    ));
    report.transcript(rep);
    report.result = json!({
        "order": g.order(),
        "elements": g.elements.iter().map(|&e| element_json(t, e)).collect::<Vec<_>>(),
    });
    Ok(report)
}

pub fn motive(mut report: Report, inputs: &[Input]) -> Result<(Report, Option<Value>), CliError> {
    let docs = documents(inputs);
    let (_, objects) = split_cover(&docs)?;
    let m = one_module(objects)?;
    let rep = m.verify_standard_form();
    if !rep.passed() {
        report.line("module fails verification");
        report.transcript(rep);
        return Ok((report, None));
    }
    let l = from_drinfeld(m)?;
    report.line(format!("ladder of rank {}, period {}, twist {}", l.rank(), l.period(), l.twist()));
    report.transcript(verify_abelian_sheaf(&l));
    let doc = document_json(&Document::Sheaf(l));
    report.documents.push(doc.clone());
    Ok((report, Some(doc)))
}

pub fn sheaf_structures(mut report: Report, inputs: &[Input], caps: Caps) -> Result<Report, CliError> {
    let docs = documents(inputs);
    let (cover, objects) = split_cover(&docs)?;
    let cover = need_cover(cover)?;
    let l = match exactly(objects, 1, "one abelian_sheaf")?[0] {
        Document::Sheaf(l) => l,
        other => return Err(CliError::Usage(format!("expected an abelian_sheaf, got {}", other.kind()))),
    };
    let structures = enumerate_sheaf_module_structures(l, cover, &caps)?;
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, s) in structures.iter().enumerate() {
        let mut placed = false;
        for class in classes.iter_mut() {
            if !module_structure_isomorphisms(l, &structures[class[0]], s, &caps)?.is_empty() {
                class.push(k);
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(vec![k]);
        }
    }
    report.line(format!("{} module structures, {} isomorphism classes", structures.len(), classes.len()));
    for (k, s) in structures.iter().enumerate() {
        let ys = s.y.iter().map(|y| y.display("x")).collect::<Vec<_>>().join(", ");
        report.line(format!("  [{k}] Y = ({ys})"));
    }
    report.result = json!({
        "structures": structures.iter().map(|s| ladder_iso_json(&s.y)).collect::<Vec<_>>(),
        "classes": classes,
    });
    Ok(report)
}

fn selftest_fields() -> Vec<FieldTower> {
    vec![
        FieldTower::prime(2).expect("F_2"),
        FieldTower::prime(3).expect("F_3"),
        FieldTower::new(2, &[0, 1], &[vec![1], vec![1], vec![1]]).expect("F_4"),
        FieldTower::new(3, &[0, 1], &[vec![1], vec![0], vec![1]]).expect("F_9"),
    ]
}

/// Randomized consistency checks; the seed only selects instances.
pub fn selftest(mut report: Report, seed: u64, rounds: usize) -> Result<Report, CliError> {
    let fields = selftest_fields();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; 5];
    let mut failures: Vec<String> = Vec::new();
    for round in 0..rounds {
        let t = &fields[rng.gen_range(0..fields.len())];
        let r = rng.gen_range(1..=2);
        let n = rng.gen_range(1..=3);
        let p = t.characteristic() as i64;
        let mut pc: Vec<i64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        pc.push(1);
        let cover = CoverMap::new(Poly::from_ints(t, &pc))?;
        let mut coeffs: Vec<_> = (0..r).map(|_| t.element(rng.gen_range(0..t.size()) as u32)).collect::<Result<_, _>>()?;
        coeffs.push(t.element(rng.gen_range(1..t.size()) as u32)?);
        let delta = SkewPoly::new(t, coeffs);
        let mp = DrinfeldModule::from_generator(RingTag::APrime, delta.clone())?;
        let m = mp.restrict(&cover)?;
        let mut fail = |what: &str| failures.push(format!("round {round}: {what} ({mp:?}, {cover:?})"));

        if m.rank() == n * r && m.verify_standard_form().passed() {
            counts[0] += 1;
        } else {
            fail("restriction violates the rank law or standard form");
        }
        let prob = ExtensionProblem::new(m.clone(), cover.clone(), r)?;
        let fast = enumerate_extensions(&prob)?;
        if fast == brute_oracle(&prob)? && fast.iter().any(|s| s.delta == delta) {
            counts[1] += 1;
        } else {
            fail("staged enumeration disagrees with the exhaustive scan");
        }
        let lhs = from_drinfeld(&m)?;
        if verify_abelian_sheaf(&lhs).passed() {
            counts[2] += 1;
        } else {
            fail("motive of the restriction fails verification");
        }
        let shtukas: Vec<Shtuka> = (0..lhs.period() as i64).map(|i| from_abelian_sheaf(&lhs, i)).collect();
        if shtukas.iter().all(|s| verify_shtuka(s).passed()) {
            counts[3] += 1;
        } else {
            fail("shtuka of the motive fails verification");
        }
        let rhs: AbelianSheafLadder =
            pushforward(&from_drinfeld(&mp)?.shifted(((n - 1) * r) as i64), &cover)?;
        if !semilinear_iso_solver(&lhs, &rhs, &Caps::default())?.is_empty() {
            counts[4] += 1;
        } else {
            fail("motive of the restriction is not isomorphic to the pushed motive");
        }
    }
    let mut rep = VerificationReport::new(format!("{rounds} random rounds, seed {seed}"));
    let names = [
        "restriction: rank law and standard form",
        "staged enumeration equals exhaustive scan",
        "motive of the restriction verifies",
        "shtukas of the motive verify",
        "restriction and pushforward of motives agree",
    ];
    for (name, c) in names.iter().zip(counts) {
        rep.check(*name, c == rounds, format!("{c}/{rounds}"));
    }
    for f in &failures {
        report.line(f.clone());
    }
    report.result = json!({ "seed": seed, "rounds": rounds, "failures": failures });
    report.transcript(rep);
    Ok(report)
}
