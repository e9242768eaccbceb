//! JSON schema of the config format, printed by `glt-lab schema`.

use serde_json::{json, Value};

fn dims() -> Value {
    json!({ "type": "array", "items": { "type": "integer", "minimum": 1 }, "description": "strictly increasing dimensions" })
}

fn name_ref(what: &str) -> Value {
    json!({ "type": "string", "description": format!("name of a defined {what}") })
}

fn range() -> Value {
    json!({
        "type": "object",
        "additionalProperties": false,
        "properties": {
            "min": { "type": "number" },
            "max": { "type": "number" },
            "approx": { "type": "number" },
            "tol": { "type": "number", "minimum": 0 }
        }
    })
}

fn task(kind: &str, required: &[&str], props: Value, expect: &[&str]) -> Value {
    let mut p = props.as_object().cloned().unwrap_or_default();
    p.insert("task".into(), json!({ "const": kind }));
    p.insert("name".into(), json!({ "type": "string", "pattern": "^[A-Za-z0-9_-][A-Za-z0-9_.-]*$" }));
    let all = json!({
        "headline": range(),
        "values": range(),
        "label": { "$ref": "#/$defs/label" },
        "labels": { "type": "array", "items": { "$ref": "#/$defs/label" } },
        "frobenius": { "enum": ["strong_evidence", "weak_evidence", "no_evidence", "inconclusive"] },
        "uniform": { "type": "boolean" },
        "pass": { "type": "boolean" },
        "max_residual": { "type": "number" },
        "max_relative_gap": { "type": "number" },
        "refused": { "type": "boolean" }
    });
    let ex: serde_json::Map<String, Value> =
        expect.iter().map(|k| ((*k).to_owned(), all[*k].clone())).collect();
    p.insert("expect".into(), json!({ "type": "object", "additionalProperties": false, "properties": ex }));
    let mut req = vec!["task"];
    req.extend_from_slice(required);
    json!({ "type": "object", "additionalProperties": false, "required": req, "properties": p })
}

fn seq_kind(kind: &str, required: &[&str], props: Value) -> Value {
    let mut p = props.as_object().cloned().unwrap_or_default();
    p.insert("kind".into(), json!({ "const": kind }));
    let mut req = vec!["kind"];
    req.extend_from_slice(required);
    json!({ "type": "object", "additionalProperties": false, "required": req, "properties": p })
}

pub fn schema() -> Value {
    let deltas = json!({ "type": "array", "items": { "type": "number", "minimum": 0, "maximum": 0.5 }, "default": [0.1, 0.05, 0.02, 0.01] });
    let eps = json!({ "type": "array", "items": { "type": "number", "exclusiveMinimum": 0 }, "description": "strictly increasing thresholds" });
    let thr = |mut v: Value| {
        v["weak_tol"] = json!({ "type": "number", "minimum": 0, "default": 0.02 });
        v["strong_cap"] = json!({ "type": "integer", "minimum": 0, "default": 8 });
        v
    };
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "glt-lab experiment config",
        "type": "object",
        "additionalProperties": false,
        "required": ["tasks"],
        "properties": {
            "seed": { "type": "integer", "minimum": 0, "description": "default seed for random sequences; --seed overrides" },
            "symbols": { "type": "object", "additionalProperties": { "$ref": "#/$defs/symbol" } },
            "sequences": { "type": "object", "additionalProperties": { "$ref": "#/$defs/sequence" } },
            "tasks": { "type": "array", "items": { "$ref": "#/$defs/task" } }
        },
        "$defs": {
            "complex": { "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2 },
            "trigpoly": {
                "type": "object",
                "additionalProperties": false,
                "required": ["coeffs"],
                "properties": { "coeffs": { "type": "object", "description": "Fourier index -> [re, im]", "additionalProperties": { "$ref": "#/$defs/complex" } } }
            },
            "scalar_func": { "type": "string", "description": "expression in x: numbers, x, pi, + - * / ^, pow(a, b), sqrt, abs, sin, cos, exp" },
            "symbol": {
                "oneOf": [
                    { "type": "object", "required": ["f"], "additionalProperties": false,
                      "properties": { "a": { "$ref": "#/$defs/scalar_func" }, "f": { "$ref": "#/$defs/trigpoly" } } },
                    { "type": "object", "required": ["op", "args"], "additionalProperties": false,
                      "properties": { "op": { "enum": ["add", "mul"] }, "args": { "type": "array", "items": { "$ref": "#/$defs/symbol" } } } },
                    { "type": "object", "required": ["op", "arg"], "additionalProperties": false,
                      "properties": { "op": { "const": "conj" }, "arg": { "$ref": "#/$defs/symbol" } } },
                    { "type": "object", "required": ["op", "c", "arg"], "additionalProperties": false,
                      "properties": { "op": { "const": "scale" }, "c": { "$ref": "#/$defs/complex" }, "arg": { "$ref": "#/$defs/symbol" } } }
                ]
            },
            "expr": {
                "description": "sequence name or operation node",
                "oneOf": [
                    { "type": "string" },
                    { "type": "object", "required": ["op", "args"], "properties": { "op": { "enum": ["add", "sub", "mul"] }, "args": { "type": "array", "minItems": 2, "items": { "$ref": "#/$defs/expr" } } } },
                    { "type": "object", "required": ["op", "arg"], "properties": { "op": { "const": "adjoint" }, "arg": { "$ref": "#/$defs/expr" } } },
                    { "type": "object", "required": ["op", "c", "arg"], "properties": { "op": { "const": "scale" }, "c": { "$ref": "#/$defs/complex" }, "arg": { "$ref": "#/$defs/expr" } } }
                ]
            },
            "word": {
                "description": "\"one\", a generator, or an operation node",
                "oneOf": [
                    { "const": "one" },
                    { "type": "object", "required": ["gen"], "properties": { "gen": { "type": "string" } } },
                    { "type": "object", "required": ["op", "args"], "properties": { "op": { "enum": ["add", "mul"] }, "args": { "type": "array", "minItems": 2, "items": { "$ref": "#/$defs/word" } } } },
                    { "type": "object", "required": ["op", "arg"], "properties": { "op": { "const": "adjoint" }, "arg": { "$ref": "#/$defs/word" } } },
                    { "type": "object", "required": ["op", "c", "arg"], "properties": { "op": { "const": "scale" }, "c": { "$ref": "#/$defs/complex" }, "arg": { "$ref": "#/$defs/word" } } }
                ]
            },
            "block_count": { "oneOf": [{ "type": "integer", "minimum": 1 }, { "const": "sqrt" }] },
            "unitary": {
                "oneOf": [
                    { "const": "fourier" },
                    { "type": "object", "required": ["block_fourier"], "additionalProperties": false, "properties": { "block_fourier": { "$ref": "#/$defs/block_count" } } },
                    { "type": "object", "required": ["explicit"], "additionalProperties": false, "properties": { "explicit": { "type": "string", "description": "matrix file or {n} pattern" } } }
                ]
            },
            "label": { "enum": ["strong", "weak", "none", "inconclusive"] },
            "test_func": {
                "oneOf": [
                    { "type": "object", "additionalProperties": false, "required": ["kind", "center", "width"],
                      "properties": { "kind": { "const": "hat" }, "center": { "type": "number" }, "width": { "type": "number", "exclusiveMinimum": 0 } } },
                    { "type": "object", "additionalProperties": false, "required": ["kind", "center", "scale"],
                      "properties": { "kind": { "const": "gaussian" }, "center": { "type": "number" }, "scale": { "type": "number", "exclusiveMinimum": 0 } } },
                    { "type": "object", "additionalProperties": false, "required": ["kind", "degree", "radius"],
                      "properties": { "kind": { "const": "poly_cutoff" }, "degree": { "type": "integer", "minimum": 1 }, "radius": { "type": "number", "exclusiveMinimum": 0 } } }
                ]
            },
            "sequence": {
                "oneOf": [
                    seq_kind("toeplitz", &["f"], json!({ "f": { "$ref": "#/$defs/trigpoly" } })),
                    seq_kind("diag", &["a"], json!({ "a": { "$ref": "#/$defs/scalar_func" } })),
                    seq_kind("lt", &["a", "f", "m"], json!({ "a": { "$ref": "#/$defs/scalar_func" }, "f": { "$ref": "#/$defs/trigpoly" }, "m": { "$ref": "#/$defs/block_count" } })),
                    seq_kind("glt", &["terms"], json!({ "terms": { "type": "array", "minItems": 1, "items": {
                        "type": "object", "required": ["f"], "additionalProperties": false,
                        "properties": { "a": { "$ref": "#/$defs/scalar_func" }, "f": { "$ref": "#/$defs/trigpoly" } } } } })),
                    seq_kind("leading_ones", &["m"], json!({ "m": { "type": "integer", "minimum": 1 } })),
                    seq_kind("identity", &[], json!({})),
                    seq_kind("zero", &[], json!({})),
                    seq_kind("random", &[], json!({ "seed": { "type": "integer", "minimum": 0 }, "scale": { "type": "number", "exclusiveMinimum": 0, "default": 1.0 } })),
                    seq_kind("symbol", &["symbol"], json!({ "symbol": name_ref("symbol") })),
                    seq_kind("algebra", &["expr"], json!({ "expr": { "$ref": "#/$defs/expr" } })),
                    seq_kind("file", &["path"], json!({ "path": { "type": "string", "description": "CSV matrix file relative to the config; {n} is replaced by the dimension" } }))
                ]
            },
            "task": {
                "oneOf": [
                    task("pa", &["seq", "dims"], json!({ "seq": name_ref("sequence"), "dims": dims() }), &["headline", "values"]),
                    task("dacs", &["x", "y", "dims"], json!({ "x": name_ref("sequence"), "y": name_ref("sequence"), "dims": dims() }), &["headline", "values"]),
                    task("qw", &["seq", "dims"], json!({ "seq": name_ref("sequence"), "dims": dims(), "deltas": deltas }), &["headline", "values"]),
                    task("qwp", &["seq", "dims", "p"], json!({ "seq": name_ref("sequence"), "dims": dims(), "deltas": deltas, "p": { "type": "number", "minimum": 1 } }), &["headline", "values"]),
                    task("cluster", &["seq", "dims", "eps"], thr(json!({ "seq": name_ref("sequence"), "minus": name_ref("sequence"), "dims": dims(), "eps": eps })), &["label", "labels", "frobenius", "uniform"]),
                    task("distribution", &["seq", "symbol", "dims"], json!({
                        "seq": name_ref("sequence"), "symbol": name_ref("symbol"), "dims": dims(),
                        "funcs": { "type": "array", "minItems": 3, "items": { "$ref": "#/$defs/test_func" } },
                        "grid": { "type": "integer", "minimum": 128, "default": 512 } }), &["pass", "max_residual"]),
                    task("isometry", &["seq", "symbol", "p", "dims"], json!({
                        "seq": name_ref("sequence"), "symbol": name_ref("symbol"),
                        "p": { "oneOf": [{ "type": "number", "minimum": 1 }, { "const": "inf" }] },
                        "dims": dims(), "deltas": deltas, "grid": { "type": "integer", "minimum": 64, "default": 512 } }), &["headline", "max_relative_gap"]),
                    task("precond", &["seq", "unitary", "dims", "eps"], thr(json!({ "seq": name_ref("sequence"), "unitary": { "$ref": "#/$defs/unitary" }, "dims": dims(), "eps": eps })), &["label", "pass", "frobenius"]),
                    task("korovkin", &["generators", "unitary", "dims", "eps"], thr(json!({
                        "generators": { "type": "array", "minItems": 1, "items": { "type": "object", "additionalProperties": false, "required": ["name", "symbol", "seq"],
                            "properties": { "name": { "type": "string" }, "symbol": name_ref("symbol"), "seq": name_ref("sequence") } } },
                        "elements": { "type": "array", "items": { "type": "object", "additionalProperties": false, "required": ["name", "word"],
                            "properties": { "name": { "type": "string" }, "word": { "$ref": "#/$defs/word" } } } },
                        "unitary": { "$ref": "#/$defs/unitary" }, "dims": dims(), "eps": eps,
                        "bound": { "type": "number", "exclusiveMinimum": 0 } })), &["label", "pass", "refused"])
                ]
            }
        }
    })
}
