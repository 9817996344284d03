//! Python adapter built on a full Python grammar.
//!
//! Entities cover classes, top-level functions, class methods and nested
//! functions. Call sites record the plain callee identifier: `g(...)` and
//! `self.g(...)` both yield `g`. Expressions evaluated in the enclosing
//! scope (decorators, default arguments, return annotations) attribute their
//! calls to the enclosing function, not the one being defined.

use rustpython_ast::Visitor;
use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::text_size::TextRange;
use rustpython_parser::Parse;

use super::lang::{CallSite, LanguageAdapter, ParseFailure, ParsedFile, RawEntity};
use super::NodeKind;

pub struct PythonAdapter;

impl LanguageAdapter for PythonAdapter {
    fn extensions(&self) -> &[&'static str] {
        &["py"]
    }

    fn parse(&self, source: &str) -> Result<ParsedFile, ParseFailure> {
        let suite = ast::Suite::parse(source, "<input>").map_err(|e| ParseFailure {
            message: e.error.to_string(),
            line: byte_to_line(source, e.offset.to_usize()),
        })?;

        let mut extractor = Extractor {
            entities: Vec::new(),
            calls: Vec::new(),
            scopes: Vec::new(),
        };
        let doc_text = docstring_of(&suite);
        for stmt in suite {
            extractor.visit_stmt(stmt);
        }
        Ok(ParsedFile {
            entities: extractor.entities,
            calls: extractor.calls,
            doc_text,
        })
    }
}

fn byte_to_line(source: &str, offset: usize) -> u32 {
    let clamped = offset.min(source.len());
    source[..clamped].bytes().filter(|b| *b == b'\n').count() as u32 + 1
}

fn docstring_of(body: &[ast::Stmt]) -> String {
    if let Some(ast::Stmt::Expr(expr)) = body.first() {
        if let ast::Expr::Constant(c) = expr.value.as_ref() {
            if let ast::Constant::Str(s) = &c.value {
                return s.clone();
            }
        }
    }
    String::new()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ScopeKind {
    Class,
    Function,
}

struct Scope {
    kind: ScopeKind,
    name: String,
}

struct Extractor {
    entities: Vec<RawEntity>,
    calls: Vec<CallSite>,
    scopes: Vec<Scope>,
}

impl Extractor {
    fn chain(&self) -> Vec<String> {
        self.scopes.iter().map(|s| s.name.clone()).collect()
    }

    /// Scope chain truncated at the innermost enclosing function, which is
    /// the entity a call site belongs to. `None` outside any function.
    fn function_chain(&self) -> Option<Vec<String>> {
        let last = self
            .scopes
            .iter()
            .rposition(|s| s.kind == ScopeKind::Function)?;
        Some(
            self.scopes[..=last]
                .iter()
                .map(|s| s.name.clone())
                .collect(),
        )
    }

    fn record_entity(&mut self, kind: NodeKind, name: &str, range: TextRange, doc: String) {
        self.entities.push(RawEntity {
            kind,
            name: name.to_string(),
            parent_chain: self.chain(),
            start_byte: range.start().to_usize(),
            end_byte: range.end().to_usize(),
            doc_text: doc,
        });
    }

    fn enter_def(
        &mut self,
        kind: ScopeKind,
        name: String,
        decorators: Vec<ast::Expr>,
        outer_exprs: Vec<ast::Expr>,
        body: Vec<ast::Stmt>,
    ) {
        // Decorators, defaults and annotations run in the enclosing scope.
        for expr in decorators {
            self.visit_expr(expr);
        }
        for expr in outer_exprs {
            self.visit_expr(expr);
        }
        self.scopes.push(Scope { kind, name });
        for stmt in body {
            self.visit_stmt(stmt);
        }
        self.scopes.pop();
    }
}

fn argument_exprs(args: ast::Arguments) -> Vec<ast::Expr> {
    let mut exprs = Vec::new();
    let all_args = args
        .posonlyargs
        .into_iter()
        .chain(args.args)
        .chain(args.kwonlyargs);
    for arg_with_default in all_args {
        if let Some(default) = arg_with_default.default {
            exprs.push(*default);
        }
        if let Some(annotation) = arg_with_default.def.annotation {
            exprs.push(*annotation);
        }
    }
    if let Some(vararg) = args.vararg {
        if let Some(annotation) = vararg.annotation {
            exprs.push(*annotation);
        }
    }
    if let Some(kwarg) = args.kwarg {
        if let Some(annotation) = kwarg.annotation {
            exprs.push(*annotation);
        }
    }
    exprs
}

impl Visitor for Extractor {
    fn visit_stmt_function_def(&mut self, node: ast::StmtFunctionDef) {
        let doc = docstring_of(&node.body);
        self.record_entity(NodeKind::Function, node.name.as_str(), node.range(), doc);
        let mut outer = argument_exprs(*node.args);
        if let Some(returns) = node.returns {
            outer.push(*returns);
        }
        self.enter_def(
            ScopeKind::Function,
            node.name.to_string(),
            node.decorator_list,
            outer,
            node.body,
        );
    }

    fn visit_stmt_async_function_def(&mut self, node: ast::StmtAsyncFunctionDef) {
        let doc = docstring_of(&node.body);
        self.record_entity(NodeKind::Function, node.name.as_str(), node.range(), doc);
        let mut outer = argument_exprs(*node.args);
        if let Some(returns) = node.returns {
            outer.push(*returns);
        }
        self.enter_def(
            ScopeKind::Function,
            node.name.to_string(),
            node.decorator_list,
            outer,
            node.body,
        );
    }

    fn visit_stmt_class_def(&mut self, node: ast::StmtClassDef) {
        let doc = docstring_of(&node.body);
        self.record_entity(NodeKind::Class, node.name.as_str(), node.range(), doc);
        let mut outer = node.bases;
        outer.extend(node.keywords.into_iter().map(|k| k.value));
        self.enter_def(
            ScopeKind::Class,
            node.name.to_string(),
            node.decorator_list,
            outer,
            node.body,
        );
    }

    fn visit_expr_call(&mut self, node: ast::ExprCall) {
        if let Some(caller_chain) = self.function_chain() {
            let callee_name = match node.func.as_ref() {
                ast::Expr::Name(name) => Some(name.id.to_string()),
                ast::Expr::Attribute(attr) => Some(attr.attr.to_string()),
                _ => None,
            };
            self.calls.push(CallSite {
                caller_chain,
                callee_name,
            });
        }
        self.generic_visit_expr_call(node);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(source: &str) -> ParsedFile {
        PythonAdapter.parse(source).expect("parse")
    }

    #[test]
    fn empty_file_has_no_entities() {
        let parsed = parse("");
        assert!(parsed.entities.is_empty());
        assert!(parsed.calls.is_empty());
    }

    #[test]
    fn nested_function_records_parent_chain() {
        let src = "class C:\n    def m(self):\n        def inner():\n            pass\n        return inner\n";
        let parsed = parse(src);
        let names: Vec<(&str, Vec<String>)> = parsed
            .entities
            .iter()
            .map(|e| (e.name.as_str(), e.parent_chain.clone()))
            .collect();
        assert_eq!(
            names,
            vec![
                ("C", vec![]),
                ("m", vec!["C".to_string()]),
                ("inner", vec!["C".to_string(), "m".to_string()]),
            ]
        );
    }

    #[test]
    fn call_sites_attribute_to_innermost_function() {
        let src = "def outer():\n    def inner():\n        helper()\n    other()\n";
        let parsed = parse(src);
        assert_eq!(
            parsed.calls,
            vec![
                CallSite {
                    caller_chain: vec!["outer".to_string(), "inner".to_string()],
                    callee_name: Some("helper".to_string()),
                },
                CallSite {
                    caller_chain: vec!["outer".to_string()],
                    callee_name: Some("other".to_string()),
                },
            ]
        );
    }

    #[test]
    fn self_call_uses_attribute_name() {
        let src = "class C:\n    def f(self):\n        return self.g()\n    def g(self):\n        return 1\n";
        let parsed = parse(src);
        assert_eq!(parsed.calls[0].callee_name.as_deref(), Some("g"));
        assert_eq!(parsed.calls[0].caller_chain, vec!["C", "f"]);
    }

    #[test]
    fn module_level_calls_are_ignored() {
        let parsed = parse("x = setup()\n");
        assert!(parsed.calls.is_empty());
    }

    #[test]
    fn decorator_call_belongs_to_enclosing_function() {
        let src = "def outer():\n    @wrap()\n    def inner():\n        pass\n    return inner\n";
        let parsed = parse(src);
        assert_eq!(parsed.calls.len(), 1);
        assert_eq!(parsed.calls[0].caller_chain, vec!["outer"]);
        assert_eq!(parsed.calls[0].callee_name.as_deref(), Some("wrap"));
    }

    #[test]
    fn docstrings_extracted() {
        let src = "\"\"\"Module doc.\"\"\"\n\nclass C:\n    \"\"\"Class doc.\"\"\"\n\n    def f(self):\n        \"\"\"Func doc.\"\"\"\n        return 1\n";
        let parsed = parse(src);
        assert_eq!(parsed.doc_text, "Module doc.");
        assert_eq!(parsed.entities[0].doc_text, "Class doc.");
        assert_eq!(parsed.entities[1].doc_text, "Func doc.");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = PythonAdapter
            .parse("def ok():\n    pass\n\ndef broken(:\n")
            .unwrap_err();
        assert_eq!(err.line, 4);
    }

    #[test]
    fn unnamed_call_target_yields_none() {
        let parsed = parse("def f():\n    factory()()\n");
        let names: Vec<Option<&str>> = parsed
            .calls
            .iter()
            .map(|c| c.callee_name.as_deref())
            .collect();
        // Outer call has no name, inner call is `factory`.
        assert!(names.contains(&None));
        assert!(names.contains(&Some("factory")));
    }
}
