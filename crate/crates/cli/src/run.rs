use std::collections::BTreeMap;
use std::sync::Arc;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use vertexbound::cofinite::{
    choose_complement, cm_quotient_dims, graded_dims, log_power_bound, log_vanishing_order, nilpotency, weight_support,
};
use vertexbound::exact::Rational;
use vertexbound::fusion::{Comparison, IntertwinerData, Witness};
use vertexbound::ode::{default_max_log, frobenius_series, indicial_exponents};
use vertexbound::reduce::Reducer;
use vertexbound::voa::{
    find_singular_vectors, identity_suite, ModuleSpec, RealizedModule, Voa, VoaKind, VoaSpec,
};

use crate::cache::Cache;
use crate::config::{rational, rationals, singular, IntertwinerConfig, ModuleConfig, RunConfig, VectorConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    GradedDims,
    CmQuotient,
    Complement,
    Reduce,
    Ode,
    Bound,
    Frobenius,
    Join,
    Compare,
    LogBound,
    IdentitySuite,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Certification {
    pub requested_depth: usize,
    pub certified_depth: Option<usize>,
    pub truncated: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config_hash: String,
    pub certification: Certification,
    pub result: Value,
}

pub fn config_hash(text: &str, depth_override: Option<usize>) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    if let Some(d) = depth_override {
        h.update(format!("\0depth={d}").as_bytes());
    }
    hex::encode(h.finalize())
}

/// Realized objects of one run. Modules get `extra` levels beyond the requested depth so that
/// C_m spans and reductions are certified up to it.
pub struct Context {
    pub cfg: RunConfig,
    pub depth: usize,
    pub voa: Voa,
    extra: usize,
    modules: BTreeMap<String, Arc<RealizedModule>>,
    cache: Option<Cache>,
}

fn voa_spec(cfg: &RunConfig, depth: usize) -> Result<VoaSpec, CliError> {
    let v = &cfg.voa;
    let kind = match v.kind.as_str() {
        "heisenberg" => VoaKind::Heisenberg,
        "virasoro" => {
            let c = rational("voa.central_charge", v.central_charge.as_deref().unwrap_or(""))?;
            if v.singular.is_empty() {
                VoaKind::VirasoroUniversal { central_charge: c }
            } else {
                VoaKind::VirasoroQuotient { central_charge: c, singular: singular("voa.singular", &v.singular)? }
            }
        }
        other => return Err(CliError::Parse(format!("voa.kind: unknown kind {other:?}"))),
    };
    Ok(VoaSpec { kind, depth })
}

impl Context {
    pub fn new(cfg: RunConfig, depth_override: Option<usize>) -> Result<Self, CliError> {
        let depth = depth_override.unwrap_or(cfg.depth);
        let probe = voa_spec(&cfg, 0)?;
        let extra = probe.generator_weight() + cfg.command.m.unwrap_or(1);
        let spec = voa_spec(&cfg, cfg.voa.depth.unwrap_or(depth + extra))?;
        let voa = Voa::new(&spec)?;
        let cache = Cache::locate(cfg.cache_dir.as_deref());
        if let Some(c) = &cache {
            c.load(voa.adjoint());
        }
        Ok(Self { cfg, depth, voa, extra, modules: BTreeMap::new(), cache })
    }

    fn module_spec(&self, name: &str, seen: &mut Vec<String>) -> Result<ModuleSpec, CliError> {
        if seen.iter().any(|s| s == name) {
            return Err(CliError::Parse(format!("module {name} contains itself")));
        }
        seen.push(name.to_string());
        let m: &ModuleConfig = &self.cfg.modules[name];
        let depth = m.depth.unwrap_or(self.depth + self.extra);
        let parent = self.voa.spec();
        let field = |f: &str| format!("modules.{name}.{f}");
        let spec = match m.kind.as_str() {
            "fock" => ModuleSpec::fock(parent, rational(&field("charge"), m.charge.as_deref().unwrap_or(""))?, depth),
            "verma" => ModuleSpec::verma(
                parent,
                rational(&field("highest_weight"), m.highest_weight.as_deref().unwrap_or(""))?,
                depth,
            ),
            "quotient" => {
                let h = rational(&field("highest_weight"), m.highest_weight.as_deref().unwrap_or(""))?;
                let mut sv = singular(&field("singular"), &m.singular)?;
                for &level in &m.singular_levels {
                    let found = find_singular_vectors(&parent.central_charge(), &h, false, level);
                    if found.is_empty() {
                        return Err(vertexbound::Error::InvalidSpec(format!(
                            "no singular vector at level {level} for h = {h}"
                        ))
                        .into());
                    }
                    sv.extend(found.into_iter().map(|coefficients| vertexbound::voa::SingularVector { level, coefficients }));
                }
                ModuleSpec::quotient(parent, h, sv, depth)
            }
            "adjoint" => ModuleSpec::adjoint(parent, depth),
            "direct_sum" => {
                let parts =
                    m.summands.iter().map(|s| self.module_spec(s, &mut seen.clone())).collect::<Result<Vec<_>, _>>()?;
                ModuleSpec::direct_sum(parent, parts, depth)
            }
            other => return Err(CliError::Parse(format!("{}: unknown kind {other:?}", field("kind")))),
        };
        Ok(spec)
    }

    pub fn module(&mut self, name: &str) -> Result<Arc<RealizedModule>, CliError> {
        if let Some(m) = self.modules.get(name) {
            return Ok(m.clone());
        }
        let spec = self.module_spec(name, &mut Vec::new())?;
        let m = if spec == *self.voa.adjoint().spec() { self.voa.adjoint().clone() } else { RealizedModule::new(&spec)? };
        if let Some(c) = &self.cache {
            c.load(&m);
        }
        self.modules.insert(name.to_string(), m.clone());
        Ok(m)
    }

    fn named(&mut self, field: &str, value: &Option<String>) -> Result<Arc<RealizedModule>, CliError> {
        let name = value.clone().ok_or_else(|| CliError::Parse(format!("command.{field} is required")))?;
        self.module(&name)
    }

    fn intertwiner(&mut self, name: &str, seen: &mut Vec<String>) -> Result<IntertwinerData, CliError> {
        if seen.iter().any(|s| s == name) {
            return Err(CliError::Parse(format!("intertwiner {name} joins itself")));
        }
        seen.push(name.to_string());
        let y: IntertwinerConfig = self.cfg.intertwiners[name].clone();
        let depth = y.depth.unwrap_or(self.depth);
        let mut data = if !y.join.is_empty() {
            let mut acc: Option<IntertwinerData> = None;
            for part in &y.join {
                let next = self.intertwiner(part, &mut seen.clone())?;
                acc = Some(match acc {
                    None => next,
                    Some(a) => a.join(&next)?,
                });
            }
            acc.unwrap()
        } else {
            let left = self.named(&format!("intertwiners.{name}.left"), &y.left)?;
            let right = self.named(&format!("intertwiners.{name}.right"), &y.right)?;
            if y.zero {
                IntertwinerData::zero(&self.voa, &left, &right, depth)
            } else {
                let couplings = match &y.couplings {
                    None => vec![(0, 0, Rational::from_integer(1.into()))],
                    Some(cs) => cs
                        .iter()
                        .map(|(r, k, c)| Ok((*r, *k, rational(&format!("intertwiners.{name}.couplings"), c)?)))
                        .collect::<Result<_, CliError>>()?,
                };
                IntertwinerData::free_boson(&self.voa, &left, &right, &couplings, depth)?
            }
        };
        if let Some(s) = &y.scale {
            data = data.scale(&rational(&format!("intertwiners.{name}.scale"), s)?);
        }
        Ok(data)
    }

    /// Writes every realized generator table back to the cache.
    pub fn persist(&self) {
        if let Some(c) = &self.cache {
            let _ = c.store(self.voa.adjoint());
            for m in self.modules.values() {
                let _ = c.store(m);
            }
        }
    }
}

fn vector(module: &RealizedModule, field: &str, v: &Option<VectorConfig>) -> Result<(usize, Vec<Rational>), CliError> {
    let v = v.as_ref().ok_or_else(|| CliError::Parse(format!("command.{field} is required")))?;
    let coords = rationals(&format!("command.{field}.coords"), &v.coords)?;
    if coords.len() != module.dim(v.level) {
        return Err(vertexbound::Error::InputShape(format!(
            "command.{field}: level {} has dimension {}, got {} coordinates",
            v.level,
            module.dim(v.level),
            coords.len()
        ))
        .into());
    }
    Ok((v.level, coords))
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn witness(w: &Witness) -> Value {
    serde_json::to_value(w).unwrap_or(Value::Null)
}

pub fn run(cmd: Command, ctx: &mut Context) -> Result<(Certification, Value), CliError> {
    let d = ctx.depth;
    let mut cert = Certification { requested_depth: d, certified_depth: Some(d), ..Default::default() };
    let c = ctx.cfg.command.clone();
    let result = match cmd {
        Command::GradedDims => {
            let m = ctx.named("module", &c.module)?;
            let g = graded_dims(&ctx.voa, &m, d);
            cert.certified_depth = g.certificate.iter().map(|l| l.level).max();
            let nil = nilpotency(&m, d);
            json!({
                "module": m.spec().to_string(),
                "dims": g.dims,
                "certificate": g.certificate,
                "weight_support": strings(&weight_support(&m)),
                "l0_nilpotency": nil,
            })
        }
        Command::CmQuotient => {
            let m = ctx.named("module", &c.module)?;
            let order = c.m.unwrap_or(1);
            json!({ "module": m.spec().to_string(), "m": order, "dims": cm_quotient_dims(&ctx.voa, &m, order, d)? })
        }
        Command::Complement => {
            let m = ctx.named("module", &c.module)?;
            let basis = choose_complement(&ctx.voa, &m, d)?;
            cert.certified_depth = Some(basis.certified_depth);
            json!({ "module": m.spec().to_string(), "basis": basis })
        }
        Command::Reduce => {
            let (u, w) = (ctx.named("left", &c.left)?, ctx.named("right", &c.right)?);
            let (a, p) = vector(&u, "p", &c.p)?;
            let (b, q) = vector(&w, "q", &c.q)?;
            let r = Reducer::with_depth(&ctx.voa, &u, &w, d)?;
            let combo = r.reduce(a, &p, b, &q)?;
            cert.notes.push("coefficients hold modulo C_1 of any target".into());
            json!({
                "left_basis": r.left_basis(),
                "right_basis": r.right_basis(),
                "combination": combo.serialize(),
            })
        }
        Command::Ode => {
            let (u, w) = (ctx.named("left", &c.left)?, ctx.named("right", &c.right)?);
            let mut ode = Reducer::with_depth(&ctx.voa, &u, &w, d)?.assemble_ode()?;
            if c.balanced {
                ode = ode.balanced();
            }
            json!({ "balanced": c.balanced, "levels": ode.levels.clone(), "system": ode.to_json() })
        }
        Command::Bound => {
            let (u, w) = (ctx.named("left", &c.left)?, ctx.named("right", &c.right)?);
            let r = Reducer::with_depth(&ctx.voa, &u, &w, d)?;
            json!({ "bound": r.fusion_bound(), "window": [r.left_basis().window(), r.right_basis().window()] })
        }
        Command::Frobenius => {
            let (u, w) = (ctx.named("left", &c.left)?, ctx.named("right", &c.right)?);
            let mut ode = Reducer::with_depth(&ctx.voa, &u, &w, d)?.assemble_ode()?;
            let balanced = c.balanced || ode.pole_order() > 1;
            if balanced {
                ode = ode.balanced();
                cert.notes.push("analysis of the level-balanced system z^L A".into());
            }
            let data = indicial_exponents(&ode)?;
            if !data.all_rational() {
                cert.notes.push("some exponents are irrational; see residual_factor".into());
            }
            let series_depth = c.series_depth.unwrap_or(d);
            let max_log = match c.max_log {
                Some(x) => x,
                None => default_max_log(nilpotency(&u, d).order.max(nilpotency(&w, d).order)),
            };
            let exponents = match &c.exponent {
                Some(e) => vec![rational("command.exponent", e)?],
                None => data.exponents.iter().map(|e| e.value.clone()).collect(),
            };
            let mut solutions = Vec::new();
            for e in &exponents {
                for s in frobenius_series(&ode, e, series_depth, max_log)? {
                    solutions.push(s.to_json());
                }
            }
            json!({
                "balanced": balanced,
                "max_log": max_log,
                "indicial": data.to_json(),
                "solutions": solutions,
                "solution_space_dim": ode.dimension,
            })
        }
        Command::Join => {
            if c.intertwiners.is_empty() {
                return Err(CliError::Parse("command.intertwiners must name at least one intertwiner".into()));
            }
            let mut acc: Option<IntertwinerData> = None;
            for n in &c.intertwiners {
                let next = ctx.intertwiner(n, &mut Vec::new())?;
                acc = Some(match acc {
                    None => next,
                    Some(a) => a.join(&next)?,
                });
            }
            let j = acc.unwrap();
            let reference = rationals("command.reference", &c.reference)?;
            let bound = Reducer::with_depth(&ctx.voa, j.left(), j.right(), d).map(|r| r.fusion_bound().value).ok();
            let quotient = j.c1_quotient_dim()?;
            cert.notes.push("finite sub-directed-set evidence".into());
            json!({
                "target_dims": j.target_dims().iter().map(|(r, n)| json!([r.to_string(), n])).collect::<Vec<_>>(),
                "c1_quotient_dim": quotient,
                "fusion_bound": bound,
                "within_bound": bound.map(|b| quotient <= b),
                "weight_support_check": if reference.is_empty() { Value::Null } else { json!(j.weight_support_check(&reference)) },
                "data": j.to_json(),
            })
        }
        Command::Compare => {
            if c.intertwiners.len() != 2 {
                return Err(CliError::Parse("command.intertwiners must name exactly two intertwiners".into()));
            }
            let a = ctx.intertwiner(&c.intertwiners[0], &mut Vec::new())?;
            let b = ctx.intertwiner(&c.intertwiners[1], &mut Vec::new())?;
            let cmp = a.compare(&b)?;
            let (forward, backward) = match &cmp {
                Comparison::LessEq(w) => (witness(w), Value::Null),
                Comparison::GreaterEq(w) => (Value::Null, witness(w)),
                Comparison::Equivalent { forward, backward } => (witness(forward), witness(backward)),
                Comparison::Incomparable => (Value::Null, Value::Null),
            };
            json!({ "relation": cmp.label(), "witness_le": forward, "witness_ge": backward })
        }
        Command::LogBound => {
            let [nu, nw, nt] = c.nilpotency.ok_or_else(|| CliError::Parse("command.nilpotency is required".into()))?;
            let b = log_power_bound(nu, nw, nt)?;
            cert.certified_depth = None;
            json!({ "bound": b, "vanishing_order": log_vanishing_order(nu, nw, nt)? })
        }
        Command::IdentitySuite => {
            let names = if c.modules.is_empty() { Vec::new() } else { c.modules.clone() };
            let mut mods = vec![ctx.voa.adjoint().clone()];
            for n in &names {
                mods.push(ctx.module(n)?);
            }
            let refs: Vec<&RealizedModule> = mods.iter().map(|m| m.as_ref()).collect();
            let rep = identity_suite(&ctx.voa, &refs);
            cert.truncated = rep.truncated > 0;
            cert.certified_depth = Some(ctx.voa.depth());
            json!({ "voa": ctx.voa.spec().to_string(), "modules": mods.iter().map(|m| m.spec().to_string()).collect::<Vec<_>>(), "report": rep })
        }
    };
    Ok((cert, result))
}
