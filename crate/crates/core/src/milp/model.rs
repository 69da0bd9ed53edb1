use std::collections::HashMap;

use crate::carbon::emission_matrix;
use crate::error::{Error, Result};
use crate::evaluator::demand_profile;
use crate::model::{Instance, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)`.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear program over named variables, minimized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    index: HashMap<String, usize>,
}

/// Variable tallies by family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VariableCounts {
    pub x: usize,
    pub s: usize,
    pub y: usize,
    pub tau: usize,
    pub p: usize,
}

pub fn x_name(job: usize, machine: usize, t: usize) -> String {
    format!("x_{}_{}_{t}", job + 1, machine + 1)
}

pub fn s_name(i: usize, j: usize) -> String {
    format!("s_{}_{}", i + 1, j + 1)
}

pub fn y_name(t: usize) -> String {
    format!("y_{t}")
}

pub fn tau_name(job: usize, machine: usize) -> String {
    format!("tau_{}_{}", job + 1, machine + 1)
}

pub fn p_name(job: usize, machine: usize, t: usize) -> String {
    format!("p_{}_{}_{t}", job + 1, machine + 1)
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_variable(&mut self, name: String, kind: VarKind, lower: f64, upper: Option<f64>) -> usize {
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.variables.len();
        self.index.insert(name.clone(), i);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        i
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn variable_mut(&mut self, index: usize) -> &mut Variable {
        &mut self.variables[index]
    }

    fn var(&self, name: &str) -> usize {
        self.index[name]
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn counts(&self) -> VariableCounts {
        let mut c = VariableCounts::default();
        for v in &self.variables {
            match v.name.split('_').next() {
                Some("x") => c.x += 1,
                Some("s") => c.s += 1,
                Some("y") => c.y += 1,
                Some("tau") => c.tau += 1,
                Some("p") => c.p += 1,
                _ => {}
            }
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Largest violation of any constraint, bound or integrality requirement.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(v, a)| a * values[v]).sum();
            let gap = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        for (var, &x) in self.variables.iter().zip(values) {
            worst = worst.max(var.lower - x);
            if let Some(u) = var.upper {
                worst = worst.max(x - u);
            }
            if var.kind == VarKind::Binary {
                worst = worst.max((x - x.round()).abs()).max(x - 1.0);
            }
        }
        worst
    }

    /// Dense assignment from `(name, value)` pairs; unnamed variables are 0.
    pub fn assignment<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Vec<f64>> {
        let mut values = vec![0.0; self.variables.len()];
        for (name, v) in pairs {
            let i = self
                .variable_index(name)
                .ok_or_else(|| Error::Parse(format!("unknown variable `{name}`")))?;
            values[i] = v;
        }
        Ok(values)
    }
}

/// Builds the carbon-aware flow-shop MILP: start indicators over each
/// operation's window, pairwise order binaries, and on-site usage `y_t`.
/// Objective: grid-only emissions of the chosen starts minus the emissions
/// avoided by on-site power.
pub fn build_milp(instance: &Instance) -> Result<MilpModel> {
    let matrix = emission_matrix(instance)?;
    let n = instance.job_count();
    let machines = instance.machines;
    let horizon = instance.horizon;
    let h = instance.period_hours;
    let mut model = MilpModel::new(instance.label.clone());

    // Declarations, in a fixed order: x, s, y, tau, p.
    for i in 0..n {
        for m in 0..machines {
            let w = matrix.window(i, m);
            for t in w.first..=w.last() {
                model.add_variable(x_name(i, m, t), VarKind::Binary, 0.0, None);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            model.add_variable(s_name(i, j), VarKind::Binary, 0.0, None);
        }
    }
    for t in 1..=horizon {
        model.add_variable(y_name(t), VarKind::Continuous, 0.0, Some(instance.onsite[t - 1]));
    }
    for i in 0..n {
        for m in 0..machines {
            model.add_variable(tau_name(i, m), VarKind::Continuous, 0.0, None);
        }
    }
    // p_imt exists for every period the operation can be running.
    let mut running: Vec<Vec<usize>> = vec![Vec::new(); horizon + 1];
    for i in 0..n {
        for m in 0..machines {
            let w = matrix.window(i, m);
            let d = instance.duration(i, m);
            if d == 0 {
                continue;
            }
            for (t, vars) in running.iter_mut().enumerate().take(w.last() + d).skip(w.first) {
                vars.push(model.add_variable(p_name(i, m, t), VarKind::Continuous, 0.0, None));
            }
        }
    }

    for i in 0..n {
        for m in 0..machines {
            let w = matrix.window(i, m);
            for (k, &e) in w.values.iter().enumerate() {
                if e != 0.0 {
                    model.objective.push((model.var(&x_name(i, m, w.first + k)), e));
                }
            }
        }
    }
    for t in 1..=horizon {
        let c = instance.carbon[t - 1];
        if c != 0.0 {
            model.objective.push((model.var(&y_name(t)), -(c * h)));
        }
    }

    for i in 0..n {
        for m in 0..machines {
            let w = matrix.window(i, m);
            let xs: Vec<(usize, usize)> = (w.first..=w.last()).map(|t| (t, model.var(&x_name(i, m, t)))).collect();
            model.constraints.push(Constraint {
                name: format!("assign_{}_{}", i + 1, m + 1),
                terms: xs.iter().map(|&(_, v)| (v, 1.0)).collect(),
                sense: Sense::Eq,
                rhs: 1.0,
            });
            let mut terms = vec![(model.var(&tau_name(i, m)), 1.0)];
            terms.extend(xs.iter().map(|&(t, v)| (v, -(t as f64))));
            model.constraints.push(Constraint {
                name: format!("start_{}_{}", i + 1, m + 1),
                terms,
                sense: Sense::Eq,
                rhs: 0.0,
            });
            let op = &instance.jobs[i].operations[m];
            if op.duration == 0 {
                continue;
            }
            for t in w.first..w.last() + op.duration {
                let mut terms = vec![(model.var(&p_name(i, m, t)), 1.0)];
                for (k, &power) in op.power.iter().enumerate() {
                    // x at t - k started k periods ago and runs its (k+1)-th period now.
                    let Some(s) = t.checked_sub(k) else { break };
                    if s < w.first {
                        break;
                    }
                    if s <= w.last() && power != 0.0 {
                        terms.push((model.var(&x_name(i, m, s)), -power));
                    }
                }
                model.constraints.push(Constraint {
                    name: format!("power_{}_{}_{t}", i + 1, m + 1),
                    terms,
                    sense: Sense::Eq,
                    rhs: 0.0,
                });
            }
        }
    }

    for i in 0..n {
        for m in 0..machines.saturating_sub(1) {
            model.constraints.push(Constraint {
                name: format!("prec_{}_{}", i + 1, m + 1),
                terms: vec![
                    (model.var(&tau_name(i, m + 1)), 1.0),
                    (model.var(&tau_name(i, m)), -1.0),
                ],
                sense: Sense::Ge,
                rhs: instance.duration(i, m) as f64,
            });
        }
    }

    let big_m = horizon as f64;
    for i in 0..n {
        for j in i + 1..n {
            let s = model.var(&s_name(i, j));
            for m in 0..machines {
                let ti = model.var(&tau_name(i, m));
                let tj = model.var(&tau_name(j, m));
                model.constraints.push(Constraint {
                    name: format!("seqa_{}_{}_{}", i + 1, j + 1, m + 1),
                    terms: vec![(ti, 1.0), (tj, -1.0), (s, big_m)],
                    sense: Sense::Ge,
                    rhs: instance.duration(j, m) as f64,
                });
                model.constraints.push(Constraint {
                    name: format!("seqb_{}_{}_{}", i + 1, j + 1, m + 1),
                    terms: vec![(tj, 1.0), (ti, -1.0), (s, -big_m)],
                    sense: Sense::Ge,
                    rhs: instance.duration(i, m) as f64 - big_m,
                });
            }
        }
    }

    for (t, vars) in running.iter().enumerate().skip(1) {
        let mut terms = vec![(model.var(&y_name(t)), 1.0)];
        terms.extend(vars.iter().map(|&v| (v, -1.0)));
        model.constraints.push(Constraint {
            name: format!("onsite_{t}"),
            terms,
            sense: Sense::Le,
            rhs: 0.0,
        });
    }

    Ok(model)
}

/// The model's variable values for a feasible schedule: start indicators,
/// order binaries, power draws and the on-site power actually used.
pub fn indicator_assignment(model: &MilpModel, instance: &Instance, schedule: &Schedule) -> Result<Vec<f64>> {
    if !schedule.feasible {
        return Err(Error::InfeasibleInstance("schedule overruns the horizon".into()));
    }
    let mut values = vec![0.0; model.variables.len()];
    let mut set = |name: String, v: f64| -> Result<()> {
        let i = model
            .variable_index(&name)
            .ok_or_else(|| Error::Parse(format!("schedule uses undeclared variable `{name}`")))?;
        values[i] = v;
        Ok(())
    };
    let mut position = vec![0; instance.job_count()];
    for (pos, &job) in schedule.sequence.iter().enumerate() {
        position[job] = pos;
    }
    for (i, row) in schedule.start.iter().enumerate() {
        for (m, &tau) in row.iter().enumerate() {
            set(x_name(i, m, tau), 1.0)?;
            set(tau_name(i, m), tau as f64)?;
            for (k, &p) in instance.jobs[i].operations[m].power.iter().enumerate() {
                set(p_name(i, m, tau + k), p)?;
            }
        }
        for j in i + 1..instance.job_count() {
            set(s_name(i, j), if position[i] < position[j] { 1.0 } else { 0.0 })?;
        }
    }
    let profile = demand_profile(instance, schedule);
    for (t, &y) in profile.onsite_used.iter().enumerate() {
        set(y_name(t + 1), y)?;
    }
    Ok(values)
}
