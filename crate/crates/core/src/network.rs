//! Rational-weight, fully connected, ReLU-activated feedforward networks,
//! plus the network surgeries used by the translations: depth increase,
//! merging with zero cross-weights, compiling degree-1 formulas into neurons,
//! and clearing the denominators out of a proto-neuron.
//!
//! A depth-0 network is just its tuple of distinct input variables; every
//! further layer is one weight matrix (row-major, one row per output neuron)
//! and one bias vector, with `ReLU` applied to every neuron.

use crate::formula::{classify, constant_value, prop_free, props, Formula, FormulaKind, LogicId};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::term::{add, cnst, degree, is_proto_neuron, mul, relu, var, Term, TermRef};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::ops::Range;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    /// One row per output neuron.
    pub weights: Vec<Vec<Rational>>,
    pub biases: Vec<Rational>,
}

impl Layer {
    pub fn out_width(&self) -> usize {
        self.biases.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("network must have at least one input variable")]
    NoInputs,
    #[error("duplicate input variable x{0}")]
    DuplicateInput(u32),
    #[error("layer {layer} must contain at least one neuron")]
    EmptyLayer { layer: usize },
    #[error("layer {layer}: {detail}")]
    BadShape { layer: usize, detail: String },
    #[error("cannot decrease depth from {from} to {to}")]
    DepthDecrease { from: usize, to: usize },
    #[error("cannot merge an empty list of networks")]
    EmptyMerge,
    #[error("formula outside the degree-1 fragments at subformula {0}")]
    OutsideFragment(String),
    #[error("term is not a proto-neuron")]
    NotProtoNeuron,
    #[error("abbreviation too large to compile into a network")]
    AbbreviationTooLarge,
    #[error("invalid rational '{0}' in network JSON")]
    BadRational(String),
    #[error("invalid input name '{0}' in network JSON (expected x<index>)")]
    BadInputName(String),
    #[error("network JSON: {0}")]
    Json(String),
}

/// A layered network; see the module docs for the shape conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuralNetwork {
    inputs: Vec<u32>,
    layers: Vec<Layer>,
}

impl NeuralNetwork {
    pub fn new(inputs: Vec<u32>, layers: Vec<Layer>) -> Result<Self, NetworkError> {
        if inputs.is_empty() {
            return Err(NetworkError::NoInputs);
        }
        let mut seen = BTreeSet::new();
        for &i in &inputs {
            if !seen.insert(i) {
                return Err(NetworkError::DuplicateInput(i));
            }
        }
        let mut prev_width = inputs.len();
        for (index, layer) in layers.iter().enumerate() {
            if layer.biases.is_empty() {
                return Err(NetworkError::EmptyLayer { layer: index });
            }
            if layer.weights.len() != layer.biases.len() {
                return Err(NetworkError::BadShape {
                    layer: index,
                    detail: format!(
                        "{} weight rows for {} biases",
                        layer.weights.len(),
                        layer.biases.len()
                    ),
                });
            }
            for (row_index, row) in layer.weights.iter().enumerate() {
                if row.len() != prev_width {
                    return Err(NetworkError::BadShape {
                        layer: index,
                        detail: format!(
                            "row {row_index} has {} weights, expected {prev_width}",
                            row.len()
                        ),
                    });
                }
            }
            prev_width = layer.biases.len();
        }
        Ok(NeuralNetwork { inputs, layers })
    }

    /// The tuple of distinct input variables, i.e. the depth-0 network.
    pub fn depth_zero(inputs: Vec<u32>) -> Result<Self, NetworkError> {
        Self::new(inputs, Vec::new())
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn output_arity(&self) -> usize {
        match self.layers.last() {
            Some(layer) => layer.out_width(),
            None => self.inputs.len(),
        }
    }

    fn stacked(&self, weights: Vec<Vec<Rational>>, biases: Vec<Rational>) -> Self {
        let mut layers = self.layers.clone();
        layers.push(Layer { weights, biases });
        NeuralNetwork::new(self.inputs.clone(), layers).expect("stacked layer shape")
    }

    /// One term per output neuron, fully unfolded down to the input
    /// variables. Lower layers are shared via `Arc`, so the result is linear
    /// in the network size even though the logical trees are not.
    pub fn output_terms(&self) -> Vec<TermRef> {
        let mut current: Vec<TermRef> = self.inputs.iter().map(|&i| var(i)).collect();
        for layer in &self.layers {
            current = layer
                .weights
                .iter()
                .zip(&layer.biases)
                .map(|(row, bias)| {
                    let mut acc: Option<TermRef> = None;
                    for (w, input) in row.iter().zip(&current) {
                        let contribution = mul(cnst(w.clone()), Arc::clone(input));
                        acc = Some(match acc {
                            None => contribution,
                            Some(sum) => add(sum, contribution),
                        });
                    }
                    let sum = acc.expect("layer rows are nonempty");
                    relu(add(sum, cnst(bias.clone())))
                })
                .collect();
        }
        current
    }

    /// Appends identity-weight ReLU layers until the network has depth
    /// `d_target`. The result agrees with `self` on [0,1]-inputs, and on all
    /// inputs when `self` has depth at least 1.
    pub fn increase_depth(&self, d_target: usize) -> Result<Self, NetworkError> {
        if d_target < self.depth() {
            return Err(NetworkError::DepthDecrease {
                from: self.depth(),
                to: d_target,
            });
        }
        let mut net = self.clone();
        while net.depth() < d_target {
            let width = net.output_arity();
            let weights = (0..width)
                .map(|j| {
                    (0..width)
                        .map(|i| {
                            if i == j {
                                Rational::one()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            let biases = vec![Rational::zero(); width];
            net = net.stacked(weights, biases);
        }
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        let json = NetworkJson {
            inputs: self.inputs.iter().map(|i| format!("x{i}")).collect(),
            layers: self
                .layers
                .iter()
                .map(|layer| LayerJson {
                    weights: layer
                        .weights
                        .iter()
                        .map(|row| row.iter().map(format_rational).collect())
                        .collect(),
                    biases: layer.biases.iter().map(format_rational).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&json).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let json: NetworkJson =
            serde_json::from_str(text).map_err(|e| NetworkError::Json(e.to_string()))?;
        let mut inputs = Vec::with_capacity(json.inputs.len());
        for name in &json.inputs {
            let index = name
                .strip_prefix('x')
                .and_then(|d| d.parse::<u32>().ok())
                .ok_or_else(|| NetworkError::BadInputName(name.clone()))?;
            inputs.push(index);
        }
        let parse = |s: &String| {
            parse_rational(s).map_err(|_| NetworkError::BadRational(s.clone()))
        };
        let mut layers = Vec::with_capacity(json.layers.len());
        for layer in &json.layers {
            let weights = layer
                .weights
                .iter()
                .map(|row| row.iter().map(parse).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let biases = layer
                .biases
                .iter()
                .map(parse)
                .collect::<Result<Vec<_>, _>>()?;
            layers.push(Layer { weights, biases });
        }
        NeuralNetwork::new(inputs, layers)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    inputs: Vec<String>,
    layers: Vec<LayerJson>,
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    weights: Vec<Vec<String>>,
    biases: Vec<String>,
}

/// Concatenates the given networks into one multi-output network: depths are
/// equalized, inputs are unioned, hidden layers are laid out block-diagonally
/// with weight 0 between neurons from different source networks, and the
/// final layer stacks all output neurons. Returns the combined network and,
/// per source network, the row range its outputs occupy.
fn concat_networks(
    nets: &[NeuralNetwork],
    sorted_inputs: bool,
) -> Result<(NeuralNetwork, Vec<Range<usize>>), NetworkError> {
    if nets.is_empty() {
        return Err(NetworkError::EmptyMerge);
    }
    let depth = nets.iter().map(NeuralNetwork::depth).max().unwrap();
    debug_assert!(depth >= 1, "concat needs at least one layer");
    let ms: Vec<NeuralNetwork> = nets
        .iter()
        .map(|n| n.increase_depth(depth))
        .collect::<Result<_, _>>()?;

    let inputs: Vec<u32> = if sorted_inputs {
        let set: BTreeSet<u32> = ms.iter().flat_map(|m| m.inputs.iter().copied()).collect();
        set.into_iter().collect()
    } else {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        for m in &ms {
            for &i in &m.inputs {
                if seen.insert(i) {
                    order.push(i);
                }
            }
        }
        order
    };
    let position: HashMap<u32, usize> = inputs
        .iter()
        .enumerate()
        .map(|(pos, &i)| (i, pos))
        .collect();

    let mut layers: Vec<Layer> = Vec::with_capacity(depth);
    for level in 0..depth {
        let prev_widths: Vec<usize> = ms
            .iter()
            .map(|m| {
                if level == 0 {
                    m.inputs.len()
                } else {
                    m.layers[level - 1].out_width()
                }
            })
            .collect();
        let total_prev: usize = if level == 0 {
            inputs.len()
        } else {
            prev_widths.iter().sum()
        };
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut offset = 0usize;
        for (net_index, m) in ms.iter().enumerate() {
            let layer = &m.layers[level];
            for (row, bias) in layer.weights.iter().zip(&layer.biases) {
                let mut padded = vec![Rational::zero(); total_prev];
                for (col, w) in row.iter().enumerate() {
                    let target = if level == 0 {
                        position[&m.inputs[col]]
                    } else {
                        offset + col
                    };
                    padded[target] = w.clone();
                }
                weights.push(padded);
                biases.push(bias.clone());
            }
            offset += prev_widths[net_index];
        }
        layers.push(Layer { weights, biases });
    }

    let mut ranges = Vec::with_capacity(ms.len());
    let mut start = 0usize;
    for m in &ms {
        let width = m.layers[depth - 1].out_width();
        ranges.push(start..start + width);
        start += width;
    }
    let combined = NeuralNetwork::new(inputs, layers)?;
    Ok((combined, ranges))
}

/// Rebuilds the given networks over a shared body: the results all have the
/// same depth, are identical below the output layer, carry weight 0 between
/// neurons coming from different source networks, and each is
/// [0,1]-equivalent to its source (equivalent when the source has depth at
/// least 1). Input variables are unioned and sorted by index. Depth-0
/// networks merge to themselves.
pub fn merge_networks(nets: &[NeuralNetwork]) -> Result<Vec<NeuralNetwork>, NetworkError> {
    if nets.is_empty() {
        return Err(NetworkError::EmptyMerge);
    }
    if nets.len() == 1 {
        return Ok(vec![nets[0].clone()]);
    }
    let depth = nets.iter().map(NeuralNetwork::depth).max().unwrap();
    if depth == 0 {
        return Ok(nets.to_vec());
    }
    let (combined, ranges) = concat_networks(nets, true)?;
    let shared = &combined.layers[..depth - 1];
    let output_layer = &combined.layers[depth - 1];
    let mut out = Vec::with_capacity(nets.len());
    for range in ranges {
        let mut layers = shared.to_vec();
        layers.push(Layer {
            weights: output_layer.weights[range.clone()].to_vec(),
            biases: output_layer.biases[range].to_vec(),
        });
        out.push(NeuralNetwork::new(combined.inputs.clone(), layers)?);
    }
    Ok(out)
}

fn first_fragment_offender(phi: &Formula) -> Formula {
    fn go(phi: &Formula) -> Option<Formula> {
        match phi.kind() {
            FormulaKind::Prod(a, b) => {
                if !prop_free(a) && !prop_free(b) {
                    return Some(phi.clone());
                }
                go(a).or_else(|| go(b))
            }
            FormulaKind::ImpP(a, b) => {
                if !prop_free(a) || !prop_free(b) {
                    return Some(phi.clone());
                }
                go(a).or_else(|| go(b))
            }
            FormulaKind::ImpL(a, b) => go(a).or_else(|| go(b)),
            FormulaKind::IterStrongSum(_, b) | FormulaKind::IterScaledSum(_, b, _) => go(b),
            _ => None,
        }
    }
    go(phi).unwrap_or_else(|| phi.clone())
}

const NEURON_EXPANSION_CAP: u64 = 1 << 16;

/// Compiles a formula of the degree-1 fragments into an equivalent neuron
/// (a single-output network): propositions become inputs, proposition-free
/// subformulas are folded to constant neurons, a product with one
/// proposition-free side becomes a scaling layer, and the Łukasiewicz
/// implication becomes the two-layer min construction over the merged
/// operand networks.
pub fn formula_to_neuron(phi: &Formula) -> Result<NeuralNetwork, NetworkError> {
    let info = classify(phi);
    let in_fragment = info.min_prod_degree.is_some_and(|d| d <= 1)
        && (info.logic_memberships.contains(&LogicId::RplProd)
            || info.logic_memberships.contains(&LogicId::LPiHalfImpPMinus));
    if !in_fragment {
        return Err(NetworkError::OutsideFragment(
            first_fragment_offender(phi).to_string(),
        ));
    }
    let dummy = {
        let used = props(phi);
        (0..).find(|i| !used.contains(i)).unwrap()
    };
    build_neuron(phi, dummy)
}

fn build_neuron(phi: &Formula, dummy: u32) -> Result<NeuralNetwork, NetworkError> {
    if let Some(r) = constant_value(phi) {
        let base = NeuralNetwork::depth_zero(vec![dummy])?;
        return Ok(base.stacked(vec![vec![Rational::zero()]], vec![r]));
    }
    match phi.kind() {
        FormulaKind::Prop(i) => NeuralNetwork::depth_zero(vec![*i]),
        FormulaKind::Prod(a, b) => {
            let (constant, live) = if prop_free(a) {
                (a, b)
            } else if prop_free(b) {
                (b, a)
            } else {
                return Err(NetworkError::OutsideFragment(phi.to_string()));
            };
            let r = constant_value(constant).expect("proposition-free side");
            let net = build_neuron(live, dummy)?;
            Ok(net.stacked(vec![vec![r]], vec![Rational::zero()]))
        }
        FormulaKind::ImpL(a, b) => {
            let na = build_neuron(a, dummy)?;
            let nb = build_neuron(b, dummy)?;
            let target = na.depth().max(nb.depth()).max(1);
            let na = na.increase_depth(target)?;
            let nb = nb.increase_depth(target)?;
            let (combined, ranges) = concat_networks(&[na, nb], false)?;
            debug_assert_eq!(ranges, vec![0..1, 1..2]);
            let difference =
                combined.stacked(vec![vec![Rational::one(), -Rational::one()]], vec![
                    Rational::zero(),
                ]);
            Ok(difference.stacked(vec![vec![-Rational::one()]], vec![Rational::one()]))
        }
        FormulaKind::IterStrongSum(..) | FormulaKind::IterScaledSum(..) => {
            let expanded = crate::scaled::expand_abbreviations(phi, NEURON_EXPANSION_CAP)
                .map_err(|_| NetworkError::AbbreviationTooLarge)?;
            build_neuron(&expanded, dummy)
        }
        _ => Err(NetworkError::OutsideFragment(phi.to_string())),
    }
}

/// Outcome of clearing the denominators of a proto-neuron: `term` contains
/// only integer constants and is equivalent to `multiplier * input`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InflationResult {
    pub multiplier: BigUint,
    pub term: TermRef,
}

/// Multiplies a proto-neuron by the constructively chosen integer that lets
/// every rational constant be rewritten as an integer: constants contribute
/// their denominator, sums combine by least common multiple (coefficients
/// `D/D'` are distributed over each summand), products multiply, `ReLU`
/// passes through.
pub fn inflate_to_integers(t: &TermRef) -> Result<InflationResult, NetworkError> {
    if !is_proto_neuron(t) {
        return Err(NetworkError::NotProtoNeuron);
    }
    fn coefficient(c: &BigUint, s: TermRef) -> TermRef {
        if c.is_one() {
            s
        } else {
            mul(cnst(crate::rational::biguint_to_rational(c)), s)
        }
    }
    fn go(t: &TermRef, memo: &mut HashMap<*const Term, (BigUint, TermRef)>) -> (BigUint, TermRef) {
        let key = Arc::as_ptr(t);
        if let Some(entry) = memo.get(&key) {
            return entry.clone();
        }
        let result = match &**t {
            Term::Const(r) => (
                r.denom().magnitude().clone(),
                cnst(Rational::from_integer(r.numer().clone())),
            ),
            Term::Var(_) => (BigUint::one(), t.clone()),
            Term::Add(a, b) => {
                let (da, sa) = go(a, memo);
                let (db, sb) = go(b, memo);
                let g = da.gcd(&db);
                let d = &da / &g * &db;
                let left = coefficient(&(&db / &g), sa);
                let right = coefficient(&(&da / &g), sb);
                (d, add(left, right))
            }
            Term::Mul(a, b) => {
                let (da, sa) = go(a, memo);
                let (db, sb) = go(b, memo);
                (da * db, mul(sa, sb))
            }
            Term::Relu(a) => {
                let (da, sa) = go(a, memo);
                (da, relu(sa))
            }
        };
        memo.insert(key, result.clone());
        result
    }
    let (multiplier, term) = go(t, &mut HashMap::new());
    debug_assert!(degree(&term) <= 1);
    Ok(InflationResult { multiplier, term })
}
