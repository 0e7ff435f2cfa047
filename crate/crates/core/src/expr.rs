//! Scalar expressions in `x` and `t` for user-defined problem data.
//!
//! Supported functions: `sin cos tan exp log ln sqrt abs pow gamma`, plus
//! the constant `pi`. Integer literals use integer arithmetic, so write
//! `1.0/2.0` rather than `1/2`.

use std::sync::Arc;

use evalexpr::{
    build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value,
};

use crate::error::{Error, Result};
use crate::problem::{SpaceFn, SpaceTimeFn};
use crate::special::gamma;

type V = Value<DefaultNumericTypes>;

struct PointContext {
    x: V,
    t: V,
    pi: V,
}

impl Context for PointContext {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&V> {
        match identifier {
            "x" => Some(&self.x),
            "t" => Some(&self.t),
            "pi" => Some(&self.pi),
            _ => None,
        }
    }

    fn call_function(&self, identifier: &str, argument: &V) -> EvalexprResult<V, DefaultNumericTypes> {
        let unary = |f: fn(f64) -> f64| -> EvalexprResult<V, DefaultNumericTypes> {
            Ok(Value::Float(f(argument.as_number()?)))
        };
        match identifier {
            "sin" => unary(f64::sin),
            "cos" => unary(f64::cos),
            "tan" => unary(f64::tan),
            "exp" => unary(f64::exp),
            "log" | "ln" => unary(f64::ln),
            "sqrt" => unary(f64::sqrt),
            "abs" => unary(f64::abs),
            "gamma" => {
                let v = gamma(argument.as_number()?)
                    .map_err(|e| EvalexprError::CustomMessage(e.to_string()))?;
                Ok(Value::Float(v))
            }
            "pow" => {
                let args = argument.as_fixed_len_tuple(2)?;
                Ok(Value::Float(args[0].as_number()?.powf(args[1].as_number()?)))
            }
            _ => Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string())),
        }
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        true
    }

    fn set_builtin_functions_disabled(&mut self, _: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        Ok(())
    }
}

/// A parsed expression in the variables `x` and `t`.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    tree: Node<DefaultNumericTypes>,
}

impl Expr {
    /// Parses `source`, allowing only the listed variables.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Parse(format!("{source:?}: {e}")))?;
        for id in tree.iter_read_variable_identifiers() {
            if id != "pi" && !vars.contains(&id) {
                return Err(Error::Parse(format!("{source:?}: unknown variable {id:?}")));
            }
        }
        let e = Self {
            source: source.to_string(),
            tree,
        };
        // reject unknown functions and type errors up front
        e.try_eval(0.5, 0.5)?;
        Ok(e)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn try_eval(&self, x: f64, t: f64) -> Result<f64> {
        let ctx = PointContext {
            x: Value::Float(x),
            t: Value::Float(t),
            pi: Value::Float(std::f64::consts::PI),
        };
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Parse(format!("{:?}: {e}", self.source)))
    }

    /// Evaluates, returning NaN on failure.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.try_eval(x, t).unwrap_or(f64::NAN)
    }

    pub fn space_time(self) -> SpaceTimeFn {
        Arc::new(move |x, t| self.eval(x, t))
    }

    pub fn space(self) -> SpaceFn {
        Arc::new(move |x| self.eval(x, 0.0))
    }
}
