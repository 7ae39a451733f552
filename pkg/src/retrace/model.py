"""Robot model DSL: typed objects, action schemas, and belief-update programs.

A model file declares types, a closed object universe, failure-probability
parameters, functions between object types (possibly partial; applying one
off its mapping is a grounding error), and action schemas.  Each
schema carries a precondition and postcondition (conjunctions of literals), a
belief-update program, an optional operator prompt (actions with prompts are
human interactions), and a map from failure labels to evidence assignments.

The belief-update program is a list of ordered assignments
``target-literal := BoolExpr`` where the expression ranges over the action's
Bernoulli variables, literal values from before the action, and targets
already assigned earlier in the same program.  Three grounding-time
constructs keep the ground program purely Boolean while letting one schema
cover several world shapes:

* ``:locals`` bindings resolve against the world the update is applied to
  (the unique object whose selector literal holds) and re-resolve on every
  application; ``:optional`` locals may be unbound.
* ``(:when (bound ?x)) / (:when (unbound ?x))`` select statements by whether
  an optional local resolved.
* ``(:forall (?y - T) (:such-that ...) ...)`` expands over objects whose
  selector literal currently holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .sexpr import SexprError, SList, Symbol, read_all


class ModelError(Exception):
    """Malformed model file."""


class GroundingError(Exception):
    """A schema could not be grounded against the given arguments/world."""


@dataclass(frozen=True, order=True)
class Literal:
    """A ground literal: predicate applied to object names."""

    pred: str
    args: tuple[str, ...] = ()

    def render(self):
        return f"{self.pred}({', '.join(self.args)})"

    def __str__(self):
        return self.render()


def parse_literal(text):
    """Inverse of Literal.render, e.g. ``at(mail room)``."""
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise ModelError(f"bad literal syntax: {text!r}")
    pred, _, inner = text[:-1].partition("(")
    pred = pred.strip()
    if not pred:
        raise ModelError(f"bad literal syntax: {text!r}")
    inner = inner.strip()
    args = tuple(a.strip() for a in inner.split(",")) if inner else ()
    return Literal(pred, args)


# Terms inside literal templates: variable reference, constant, or a function
# application over another term.
@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Const:
    value: str


@dataclass(frozen=True)
class FuncApp:
    func: str
    arg: object


@dataclass(frozen=True)
class Template:
    """A literal with possibly unresolved terms, plus polarity."""

    pred: str
    terms: tuple = ()
    positive: bool = True

    def same_atom(self, other):
        return self.pred == other.pred and self.terms == other.terms


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    infer: Template | None = None


@dataclass(frozen=True)
class LocalBinding:
    name: str
    type: str
    selector: Template
    optional: bool = False


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    arg_type: str
    ret_type: str
    mapping: tuple  # ((arg, value), ...)

    def apply(self, value):
        for key, out in self.mapping:
            if key == value:
                return out
        raise GroundingError(f"function {self.name} not defined on {value!r}")


@dataclass(frozen=True)
class ActionVar:
    name: str
    alpha_param: str


@dataclass(frozen=True)
class Statement:
    target: Template
    expr: tuple  # lifted expression tree


@dataclass(frozen=True)
class WhenBlock:
    local: str
    bound: bool
    body: tuple


@dataclass(frozen=True)
class ForallBlock:
    var: str
    type: str
    selector: Template
    distinct: tuple  # var names the bound object must differ from
    body: tuple


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple
    locals: tuple
    precondition: tuple
    postcondition: tuple
    variables: tuple
    update: tuple
    prompt: str | None = None
    failure_evidence: tuple = ()  # ((label, ((template, bool), ...)), ...)
    timeout_label: str | None = None

    @property
    def labels(self):
        return tuple(label for label, _ in self.failure_evidence)


@dataclass
class RobotModel:
    name: str
    types: tuple
    objects: dict  # name -> type, declaration order preserved
    params: dict  # alpha name -> float
    functions: dict
    actions: dict

    def objects_of(self, type_name):
        return [o for o, t in self.objects.items() if t == type_name]

    def alpha(self, name, overrides=None):
        if overrides and name in overrides:
            value = overrides[name]
        elif name in self.params:
            value = self.params[name]
        else:
            raise GroundingError(f"unknown model parameter {name!r}")
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise GroundingError(f"parameter {name}={value} outside [0, 1]")
        return value


# ---------------------------------------------------------------------------
# Parsing


def _expect_symbol(node, what, source):
    if not isinstance(node, Symbol):
        raise ModelError(f"{source}: expected {what}, got {node!r}")
    return str(node)


def _parse_term(node, source):
    if isinstance(node, Symbol):
        name = str(node)
        if name.startswith("?"):
            return VarRef(name)
        return Const(name)
    if isinstance(node, str):
        return Const(node)
    if isinstance(node, (int, float)):
        return Const(str(node))
    if isinstance(node, SList):
        if len(node) != 2:
            raise ModelError(f"{source}: function application takes one argument")
        func = _expect_symbol(node[0], "function name", source)
        return FuncApp(func, _parse_term(node[1], source))
    raise ModelError(f"{source}: bad term {node!r}")


def _parse_template(node, source, allow_negation=True):
    if not isinstance(node, SList) or not node:
        raise ModelError(f"{source}: expected a literal, got {node!r}")
    if isinstance(node[0], Symbol) and str(node[0]) == "not":
        if not allow_negation:
            raise ModelError(f"{source}: negation not allowed here")
        if len(node) != 2:
            raise ModelError(f"{source}: (not ...) takes one literal")
        inner = _parse_template(node[1], source, allow_negation=False)
        return Template(inner.pred, inner.terms, positive=False)
    pred = _expect_symbol(node[0], "predicate name", source)
    terms = tuple(_parse_term(t, source) for t in node[1:])
    return Template(pred, terms)


def _parse_condition(node, source):
    """(and lit...) or a bare literal; empty (and) is the vacuous condition."""
    if isinstance(node, SList) and node and isinstance(node[0], Symbol) and str(node[0]) == "and":
        return tuple(_parse_template(item, source) for item in node[1:])
    return (_parse_template(node, source),)


def _parse_expr(node, declared_vars, source):
    if isinstance(node, Symbol):
        name = str(node)
        if name.startswith("?"):
            if name not in declared_vars:
                raise ModelError(f"{source}: undeclared action variable {name}")
            return ("var", name)
        if name == "true":
            return ("const", True)
        if name == "false":
            return ("const", False)
        raise ModelError(f"{source}: bad expression atom {name!r}")
    if isinstance(node, SList) and node and isinstance(node[0], Symbol):
        head = str(node[0])
        if head == "not":
            if len(node) != 2:
                raise ModelError(f"{source}: (not ...) takes one operand")
            return ("not", _parse_expr(node[1], declared_vars, source))
        if head in ("and", "or"):
            return (head, tuple(_parse_expr(n, declared_vars, source) for n in node[1:]))
    # anything else is a literal reference
    tmpl = _parse_template(node, source, allow_negation=False)
    return ("lit", tmpl)


def _parse_typed_groups(nodes, source):
    """Parse ``name... - type`` groups, yielding (name, type) pairs."""
    pending = []
    i = 0
    while i < len(nodes):
        node = nodes[i]
        if isinstance(node, Symbol) and str(node) == "-":
            if not pending or i + 1 >= len(nodes):
                raise ModelError(f"{source}: malformed typed group")
            type_name = _expect_symbol(nodes[i + 1], "type name", source)
            for name in pending:
                yield name, type_name
            pending = []
            i += 2
        else:
            if isinstance(node, (Symbol, str)):
                pending.append(str(node))
            elif isinstance(node, (int, float)):
                pending.append(str(node))
            else:
                raise ModelError(f"{source}: bad object name {node!r}")
            i += 1
    if pending:
        raise ModelError(f"{source}: objects missing '- type'")


def _parse_params_section(nodes, source, locals_mode):
    """Parse :parameters / :locals entries.

    Grammar per entry: ``?name - type [selector-literal] [:optional]``.
    """
    out = []
    i = 0
    while i < len(nodes):
        name = _expect_symbol(nodes[i], "parameter name", source)
        if not name.startswith("?"):
            raise ModelError(f"{source}: parameter names start with '?': {name}")
        if i + 2 >= len(nodes) or not (
            isinstance(nodes[i + 1], Symbol) and str(nodes[i + 1]) == "-"
        ):
            raise ModelError(f"{source}: parameter {name} missing '- type'")
        type_name = _expect_symbol(nodes[i + 2], "type name", source)
        i += 3
        selector = None
        optional = False
        if i < len(nodes) and isinstance(nodes[i], SList):
            selector = _parse_template(nodes[i], source, allow_negation=False)
            i += 1
        if i < len(nodes) and isinstance(nodes[i], Symbol) and str(nodes[i]) == ":optional":
            optional = True
            i += 1
        if locals_mode:
            if selector is None:
                raise ModelError(f"{source}: local {name} needs a selector literal")
            out.append(LocalBinding(name, type_name, selector, optional))
        else:
            if optional:
                raise ModelError(f"{source}: :optional only applies to locals")
            out.append(Param(name, type_name, selector))
    return tuple(out)


def _parse_update(nodes, source):
    variables = []
    body = []

    def parse_set(node):
        if len(node) != 3:
            raise ModelError(f"{source}: (:set target expr)")
        target = _parse_template(node[1], source, allow_negation=False)
        expr = _parse_expr(node[2], {v.name for v in variables}, source)
        return Statement(target, expr)

    for node in nodes:
        if not (isinstance(node, SList) and node and isinstance(node[0], Symbol)):
            raise ModelError(f"{source}: bad update item {node!r}")
        head = str(node[0])
        if head == ":var":
            if len(node) != 3:
                raise ModelError(f"{source}: (:var ?name alpha-param)")
            vname = _expect_symbol(node[1], "variable name", source)
            alpha = _expect_symbol(node[2], "parameter name", source)
            variables.append(ActionVar(vname, alpha))
        elif head == ":set":
            body.append(parse_set(node))
        elif head == ":when":
            cond = node[1]
            if (
                not isinstance(cond, SList)
                or len(cond) != 2
                or str(cond[0]) not in ("bound", "unbound")
            ):
                raise ModelError(f"{source}: :when condition is (bound ?x) or (unbound ?x)")
            local = _expect_symbol(cond[1], "local name", source)
            stmts = tuple(parse_set(n) for n in node[2:])
            body.append(WhenBlock(local, str(cond[0]) == "bound", stmts))
        elif head == ":forall":
            if len(node) < 3:
                raise ModelError(f"{source}: malformed :forall")
            binder = node[1]
            if not isinstance(binder, SList) or len(binder) != 3 or str(binder[1]) != "-":
                raise ModelError(f"{source}: :forall binder is (?y - type)")
            var = _expect_symbol(binder[0], "variable", source)
            type_name = _expect_symbol(binder[2], "type", source)
            rest = node[2:]
            selector = None
            distinct = []
            if rest and isinstance(rest[0], SList) and str(rest[0][0]) == ":such-that":
                for clause in rest[0][1:]:
                    head2 = str(clause[0])
                    if head2 == "true":
                        selector = _parse_template(clause[1], source, allow_negation=False)
                    elif head2 == "distinct":
                        if str(clause[1]) != var:
                            raise ModelError(f"{source}: distinct clause must start with {var}")
                        distinct.append(_expect_symbol(clause[2], "variable", source))
                    else:
                        raise ModelError(f"{source}: bad :such-that clause {head2}")
                rest = rest[1:]
            if selector is None:
                raise ModelError(f"{source}: :forall needs a (true ...) selector")
            stmts = tuple(parse_set(n) for n in rest)
            body.append(ForallBlock(var, type_name, selector, tuple(distinct), stmts))
        else:
            raise ModelError(f"{source}: unknown update form {head}")
    if not variables:
        raise ModelError(f"{source}: update declares no action variable")
    return tuple(variables), tuple(body)


def _parse_action(node, source):
    name = _expect_symbol(node[1], "action name", source)
    where = f"{source}: action {name}"
    params = ()
    locals_ = ()
    precondition = ()
    postcondition = ()
    variables = ()
    update = ()
    prompt = None
    failure = []
    timeout_label = None
    seen = set()
    for section in node[2:]:
        if not (isinstance(section, SList) and section and isinstance(section[0], Symbol)):
            raise ModelError(f"{where}: bad section {section!r}")
        head = str(section[0])
        if head in seen:
            raise ModelError(f"{where}: duplicate section {head}")
        seen.add(head)
        if head == ":parameters":
            params = _parse_params_section(section[1:], where, locals_mode=False)
        elif head == ":locals":
            locals_ = _parse_params_section(section[1:], where, locals_mode=True)
        elif head == ":precondition":
            if len(section) != 2:
                raise ModelError(f"{where}: :precondition takes one condition")
            precondition = _parse_condition(section[1], where)
        elif head == ":postcondition":
            if len(section) != 2:
                raise ModelError(f"{where}: :postcondition takes one condition")
            postcondition = _parse_condition(section[1], where)
        elif head == ":update":
            variables, update = _parse_update(section[1:], where)
        elif head == ":prompt":
            if len(section) != 2 or not isinstance(section[1], str):
                raise ModelError(f"{where}: :prompt takes one string")
            prompt = section[1]
        elif head == ":failure":
            for entry in section[1:]:
                if not isinstance(entry, SList) or not isinstance(entry[0], str):
                    raise ModelError(f"{where}: failure entry is (\"label\" (lit bool)...)")
                label = entry[0]
                assigns = []
                for pair in entry[1:]:
                    if not isinstance(pair, SList) or len(pair) != 2:
                        raise ModelError(f"{where}: failure assignment is (literal bool)")
                    tmpl = _parse_template(pair[0], where, allow_negation=False)
                    value = str(pair[1])
                    if value not in ("true", "false"):
                        raise ModelError(f"{where}: failure value must be true/false")
                    assigns.append((tmpl, value == "true"))
                failure.append((label, tuple(assigns)))
        elif head == ":on-timeout":
            if len(section) != 2 or not isinstance(section[1], str):
                raise ModelError(f"{where}: :on-timeout takes one label string")
            timeout_label = section[1]
        else:
            raise ModelError(f"{where}: unknown section {head}")
    if not variables:
        raise ModelError(f"{where}: missing :update")
    labels = [label for label, _ in failure]
    if len(set(labels)) != len(labels):
        raise ModelError(f"{where}: duplicate failure label")
    if timeout_label is None and labels:
        timeout_label = labels[0]
    if timeout_label is not None and timeout_label not in labels:
        raise ModelError(f"{where}: :on-timeout label {timeout_label!r} not declared")
    schema = ActionSchema(
        name,
        params,
        locals_,
        precondition,
        postcondition,
        variables,
        update,
        prompt,
        tuple(failure),
        timeout_label,
    )
    _check_schema(schema, where)
    return schema


def _templates_in(expr):
    kind = expr[0]
    if kind == "lit":
        yield expr[1]
    elif kind == "not":
        yield from _templates_in(expr[1])
    elif kind in ("and", "or"):
        for sub in expr[1]:
            yield from _templates_in(sub)


def _check_schema(schema, where):
    names = [p.name for p in schema.params] + [l.name for l in schema.locals]
    if len(set(names)) != len(names):
        raise ModelError(f"{where}: duplicate parameter/local name")
    known = set(names)

    def check_template(tmpl):
        for term in tmpl.terms:
            t = term
            while isinstance(t, FuncApp):
                t = t.arg
            if isinstance(t, VarRef) and t.name not in known:
                raise ModelError(f"{where}: unbound variable {t.name} in {tmpl.pred}")

    for tmpl in schema.precondition + schema.postcondition:
        check_template(tmpl)
    cond_atoms = [
        (t.pred, t.terms) for t in schema.precondition + schema.postcondition
    ]
    for _, assigns in schema.failure_evidence:
        for tmpl, _ in assigns:
            check_template(tmpl)
            if (tmpl.pred, tmpl.terms) not in cond_atoms:
                raise ModelError(
                    f"{where}: failure evidence {tmpl.pred} not in precondition/postcondition"
                )
    for item in schema.update:
        if isinstance(item, Statement):
            check_template(item.target)
        elif isinstance(item, WhenBlock):
            if item.local not in known:
                raise ModelError(f"{where}: :when references unknown local {item.local}")
            for st in item.body:
                check_template(st.target)
        elif isinstance(item, ForallBlock):
            inner = set(known) | {item.var}
            for name in item.distinct:
                if name not in known:
                    raise ModelError(f"{where}: distinct references unknown {name}")
            for st in item.body:
                for term in st.target.terms:
                    t = term
                    while isinstance(t, FuncApp):
                        t = t.arg
                    if isinstance(t, VarRef) and t.name not in inner:
                        raise ModelError(f"{where}: unbound variable {t.name}")


def parse_model(text, source="<model>"):
    try:
        nodes = read_all(text, source)
    except SexprError as exc:
        raise ModelError(str(exc)) from None
    if len(nodes) != 1:
        raise ModelError(f"{source}: expected a single (:model ...) form")
    root = nodes[0]
    if not (isinstance(root, SList) and root and str(root[0]) == ":model"):
        raise ModelError(f"{source}: file must start with (:model name ...)")
    name = _expect_symbol(root[1], "model name", source)
    types = ()
    objects = {}
    params = {}
    functions = {}
    actions = {}
    for section in root[2:]:
        if not (isinstance(section, SList) and section and isinstance(section[0], Symbol)):
            raise ModelError(f"{source}: bad section {section!r}")
        head = str(section[0])
        if head == ":types":
            types = tuple(_expect_symbol(t, "type name", source) for t in section[1:])
        elif head == ":objects":
            for group in section[1:]:
                if not isinstance(group, SList):
                    raise ModelError(f"{source}: :objects contains typed groups")
                for obj, type_name in _parse_typed_groups(list(group), source):
                    if obj in objects:
                        raise ModelError(f"{source}: duplicate object {obj!r}")
                    if type_name not in types:
                        raise ModelError(f"{source}: unknown type {type_name!r}")
                    objects[obj] = type_name
        elif head == ":params":
            for entry in section[1:]:
                if not isinstance(entry, SList) or len(entry) != 2:
                    raise ModelError(f"{source}: :params entries are (name value)")
                pname = _expect_symbol(entry[0], "parameter name", source)
                try:
                    value = float(entry[1])
                except (TypeError, ValueError):
                    raise ModelError(f"{source}: parameter {pname} value must be a number")
                if not 0.0 <= value <= 1.0:
                    raise ModelError(f"{source}: parameter {pname}={value} outside [0, 1]")
                if pname in params:
                    raise ModelError(f"{source}: duplicate parameter {pname}")
                params[pname] = value
        elif head == ":function":
            fname = _expect_symbol(section[1], "function name", source)
            sig = section[2]
            if not isinstance(sig, SList) or len(sig) != 2:
                raise ModelError(f"{source}: function signature is (arg-type ret-type)")
            arg_type = _expect_symbol(sig[0], "type", source)
            ret_type = _expect_symbol(sig[1], "type", source)
            pairs = []
            for pair in section[3]:
                if not isinstance(pair, SList) or len(pair) != 2:
                    raise ModelError(f"{source}: function entries are (arg value)")
                pairs.append((str(pair[0]), str(pair[1])))
            if fname in functions:
                raise ModelError(f"{source}: duplicate function {fname}")
            functions[fname] = FunctionDecl(fname, arg_type, ret_type, tuple(pairs))
        elif head == ":action":
            schema = _parse_action(section, source)
            if schema.name in actions:
                raise ModelError(f"{source}: duplicate action {schema.name}")
            actions[schema.name] = schema
        else:
            raise ModelError(f"{source}: unknown section {head}")
    model = RobotModel(name, types, objects, params, functions, actions)
    for pname, p in ((s.name, p) for s in actions.values() for p in s.params + s.locals):
        if p.type not in types:
            raise ModelError(f"{source}: action {pname} uses unknown type {p.type}")
    for func in functions.values():
        if func.arg_type not in types or func.ret_type not in types:
            raise ModelError(f"{source}: function {func.name} uses unknown type")
        domain = set(model.objects_of(func.arg_type))
        for key, value in func.mapping:
            if key not in domain:
                raise ModelError(f"{source}: function {func.name} maps non-{func.arg_type} {key!r}")
            if model.objects.get(value) != func.ret_type:
                raise ModelError(f"{source}: function {func.name} maps to non-{func.ret_type} {value!r}")
    for schema in actions.values():
        for var in schema.variables:
            if var.alpha_param not in params:
                raise ModelError(
                    f"{source}: action {schema.name} uses unknown parameter {var.alpha_param}"
                )
    return model


def load_model(path):
    with open(path, encoding="utf-8") as f:
        return parse_model(f.read(), source=str(path))


# ---------------------------------------------------------------------------
# Pretty printing (round-trips through parse_model)


def _fmt_atom(value):
    if isinstance(value, str) and not value.startswith("?") and not value.startswith(":"):
        return '"' + value.replace('"', '\\"') + '"'
    return value


def _fmt_term(term):
    if isinstance(term, VarRef):
        return term.name
    if isinstance(term, Const):
        return _fmt_atom(term.value)
    if isinstance(term, FuncApp):
        return f"({term.func} {_fmt_term(term.arg)})"
    raise TypeError(term)


def _fmt_template(tmpl):
    inner = " ".join([tmpl.pred] + [_fmt_term(t) for t in tmpl.terms])
    body = f"({inner})"
    return body if tmpl.positive else f"(not {body})"


def _fmt_expr(expr):
    kind = expr[0]
    if kind == "var":
        return expr[1]
    if kind == "const":
        return "true" if expr[1] else "false"
    if kind == "lit":
        return _fmt_template(expr[1])
    if kind == "not":
        return f"(not {_fmt_expr(expr[1])})"
    return "(" + " ".join([kind] + [_fmt_expr(e) for e in expr[1]]) + ")"


def _fmt_condition(templates):
    return "(and " + " ".join(_fmt_template(t) for t in templates) + ")" if templates else "(and)"


def format_model(model):
    out = [f"(:model {model.name}"]
    out.append("  (:types " + " ".join(model.types) + ")")
    by_type = {}
    for obj, type_name in model.objects.items():
        by_type.setdefault(type_name, []).append(obj)
    groups = []
    for type_name, names in by_type.items():
        groups.append("(" + " ".join(_fmt_atom(n) for n in names) + f" - {type_name})")
    out.append("  (:objects\n    " + "\n    ".join(groups) + ")")
    if model.params:
        entries = " ".join(f"({k} {v!r})" for k, v in model.params.items())
        out.append(f"  (:params {entries})")
    for func in model.functions.values():
        pairs = " ".join(f"({_fmt_atom(k)} {_fmt_atom(v)})" for k, v in func.mapping)
        out.append(
            f"  (:function {func.name} ({func.arg_type} {func.ret_type}) ({pairs}))"
        )
    for schema in model.actions.values():
        lines = [f"  (:action {schema.name}"]
        if schema.params:
            entries = []
            for p in schema.params:
                entry = f"{p.name} - {p.type}"
                if p.infer is not None:
                    entry += f" {_fmt_template(p.infer)}"
                entries.append(entry)
            lines.append("    (:parameters " + " ".join(entries) + ")")
        if schema.locals:
            entries = []
            for l in schema.locals:
                entry = f"{l.name} - {l.type} {_fmt_template(l.selector)}"
                if l.optional:
                    entry += " :optional"
                entries.append(entry)
            lines.append("    (:locals " + " ".join(entries) + ")")
        lines.append(f"    (:precondition {_fmt_condition(schema.precondition)})")
        lines.append(f"    (:postcondition {_fmt_condition(schema.postcondition)})")
        upd = ["    (:update"]
        for var in schema.variables:
            upd.append(f"      (:var {var.name} {var.alpha_param})")
        for item in schema.update:
            if isinstance(item, Statement):
                upd.append(f"      (:set {_fmt_template(item.target)} {_fmt_expr(item.expr)})")
            elif isinstance(item, WhenBlock):
                word = "bound" if item.bound else "unbound"
                upd.append(f"      (:when ({word} {item.local})")
                for st in item.body:
                    upd.append(f"        (:set {_fmt_template(st.target)} {_fmt_expr(st.expr)})")
                upd.append("      )")
            elif isinstance(item, ForallBlock):
                clauses = [f"(true {_fmt_template(item.selector)})"]
                for name in item.distinct:
                    clauses.append(f"(distinct {item.var} {name})")
                upd.append(
                    f"      (:forall ({item.var} - {item.type}) (:such-that "
                    + " ".join(clauses)
                    + ")"
                )
                for st in item.body:
                    upd.append(f"        (:set {_fmt_template(st.target)} {_fmt_expr(st.expr)})")
                upd.append("      )")
        upd.append("    )")
        lines.extend(upd)
        if schema.prompt is not None:
            lines.append(f"    (:prompt {_fmt_atom(schema.prompt)})")
        if schema.failure_evidence:
            entries = []
            for label, assigns in schema.failure_evidence:
                parts = " ".join(
                    f"({_fmt_template(t)} {'true' if v else 'false'})" for t, v in assigns
                )
                entries.append(f"({_fmt_atom(label)} {parts})")
            lines.append("    (:failure " + " ".join(entries) + ")")
        if schema.timeout_label is not None and schema.timeout_label != (
            schema.labels[0] if schema.labels else None
        ):
            lines.append(f"    (:on-timeout {_fmt_atom(schema.timeout_label)})")
        lines.append("  )")
        out.extend(lines)
    out.append(")")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Grounding


@dataclass(frozen=True)
class GroundCond:
    literal: Literal
    positive: bool = True

    def render(self):
        text = self.literal.render()
        return text if self.positive else f"not {text}"


@dataclass(frozen=True)
class GroundStatement:
    target: Literal
    expr: tuple  # over ("var", name) / ("prev", lit) / ("new", lit) / ("const", b)


@dataclass(frozen=True)
class GroundVar:
    name: str
    alpha_param: str
    alpha: float


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple
    locals: tuple  # ((name, value-or-None), ...)
    variables: tuple  # GroundVar, first one is the success variable
    statements: tuple
    precondition: tuple  # GroundCond
    postcondition: tuple
    prompt: str | None
    failure_evidence: tuple  # ((label, ((Literal, bool), ...)), ...)
    timeout_label: str | None
    schema: ActionSchema = field(compare=False, repr=False)
    model: RobotModel = field(compare=False, repr=False)

    def render(self):
        return f"{self.name}({', '.join(self.args)})"

    @property
    def success_var(self):
        return self.variables[0]

    @property
    def labels(self):
        return tuple(label for label, _ in self.failure_evidence)

    def evidence_for(self, label):
        for name, assigns in self.failure_evidence:
            if name == label:
                return assigns
        raise GroundingError(f"{self.render()}: unknown failure label {label!r}")

    def alpha_overrides(self):
        return {v.alpha_param: v.alpha for v in self.variables}


class LiteralSetWorld:
    """A crisp world: a literal holds iff it is in the set."""

    def __init__(self, literals=()):
        self.literals = frozenset(literals)

    def ml_true(self, literal):
        return literal in self.literals


def _subst_term(term, env, functions):
    if isinstance(term, Const):
        return term.value
    if isinstance(term, VarRef):
        value = env.get(term.name)
        if value is None:
            raise GroundingError(f"unbound variable {term.name}")
        return value
    if isinstance(term, FuncApp):
        func = functions.get(term.func)
        if func is None:
            raise GroundingError(f"unknown function {term.func}")
        return func.apply(_subst_term(term.arg, env, functions))
    raise TypeError(term)


def _subst_literal(tmpl, env, functions):
    return Literal(tmpl.pred, tuple(_subst_term(t, env, functions) for t in tmpl.terms))


def _resolve_unique(model, world, type_name, selector, var, env):
    candidates = []
    scoped = dict(env)
    for obj in model.objects_of(type_name):
        scoped[var] = obj
        if world.ml_true(_subst_literal(selector, scoped, model.functions)):
            candidates.append(obj)
    return candidates


def ground_action(model, name, args, world, alpha_overrides=None):
    """Bind a schema to concrete objects against a world snapshot.

    ``world`` needs an ``ml_true(literal)`` method; omitted arguments and
    ``:locals`` resolve to the unique object whose selector literal holds.
    """
    schema = model.actions.get(name)
    if schema is None:
        raise GroundingError(f"unknown action {name!r}")
    args = tuple(str(a) for a in args)
    params = schema.params
    inferable = [p for p in params if p.infer is not None]
    env = {}
    if len(args) == len(params):
        explicit = list(params)
    elif len(args) == len(params) - len(inferable):
        explicit = [p for p in params if p.infer is None]
    else:
        raise GroundingError(
            f"{name} takes {len(params)} arguments "
            f"(or {len(params) - len(inferable)} with inference), got {len(args)}"
        )
    for param, value in zip(explicit, args):
        if model.objects.get(value) != param.type:
            raise GroundingError(
                f"{name}: argument {value!r} is not a declared {param.type}"
            )
        env[param.name] = value
    for param in params:
        if param.name in env:
            continue
        found = _resolve_unique(model, world, param.type, param.infer, param.name, env)
        if len(found) != 1:
            raise GroundingError(
                f"{name}: cannot infer {param.name} from {param.infer.pred}: "
                f"{len(found)} candidates {found}"
            )
        env[param.name] = found[0]
    local_values = []
    for local in schema.locals:
        found = _resolve_unique(model, world, local.type, local.selector, local.name, env)
        if len(found) == 1:
            env[local.name] = found[0]
            local_values.append((local.name, found[0]))
        elif not found and local.optional:
            local_values.append((local.name, None))
        else:
            raise GroundingError(
                f"{name}: local {local.name} resolves to {len(found)} candidates {found}"
            )

    variables = tuple(
        GroundVar(v.name, v.alpha_param, model.alpha(v.alpha_param, alpha_overrides))
        for v in schema.variables
    )

    flat = []
    for item in schema.update:
        if isinstance(item, Statement):
            flat.append((item, env))
        elif isinstance(item, WhenBlock):
            if (env.get(item.local) is not None) == item.bound:
                flat.extend((st, env) for st in item.body)
        elif isinstance(item, ForallBlock):
            scoped_base = dict(env)
            for obj in model.objects_of(item.type):
                scoped = dict(scoped_base)
                scoped[item.var] = obj
                if any(scoped.get(other) == obj for other in item.distinct):
                    continue
                if not world.ml_true(_subst_literal(item.selector, scoped, model.functions)):
                    continue
                flat.extend((st, scoped) for st in item.body)

    assigned = set()
    statements = []
    for st, scope in flat:
        target = _subst_literal(st.target, scope, model.functions)
        if target in assigned:
            raise GroundingError(f"{name}: literal {target.render()} assigned twice")

        def ground_expr(expr):
            kind = expr[0]
            if kind == "var":
                return expr
            if kind == "const":
                return expr
            if kind == "lit":
                lit = _subst_literal(expr[1], scope, model.functions)
                return ("new" if lit in assigned else "prev", lit)
            if kind == "not":
                return ("not", ground_expr(expr[1]))
            return (kind, tuple(ground_expr(e) for e in expr[1]))

        statements.append(GroundStatement(target, ground_expr(st.expr)))
        assigned.add(target)

    def ground_conds(templates):
        return tuple(
            GroundCond(_subst_literal(t, env, model.functions), t.positive)
            for t in templates
        )

    prompt = None
    if schema.prompt is not None:
        prompt = schema.prompt.format(**{k[1:]: v for k, v in env.items() if v is not None})
    evidence = tuple(
        (
            label,
            tuple((_subst_literal(t, env, model.functions), v) for t, v in assigns),
        )
        for label, assigns in schema.failure_evidence
    )
    return GroundAction(
        name=name,
        args=tuple(env[p.name] for p in params),
        locals=tuple(local_values),
        variables=variables,
        statements=tuple(statements),
        precondition=ground_conds(schema.precondition),
        postcondition=ground_conds(schema.postcondition),
        prompt=prompt,
        failure_evidence=evidence,
        timeout_label=schema.timeout_label,
        schema=schema,
        model=model,
    )


def reground(action, world):
    """Re-bind an action's :locals against a new world, keeping its arguments."""
    return ground_action(
        action.model, action.name, action.args, world, action.alpha_overrides()
    )


def gexpr_atoms(expr, out=None):
    """Ordered unique atoms (var/prev/new references) of a ground expression."""
    if out is None:
        out = []
    kind = expr[0]
    if kind in ("var", "prev", "new"):
        if expr not in out:
            out.append(expr)
    elif kind == "not":
        gexpr_atoms(expr[1], out)
    elif kind in ("and", "or"):
        for sub in expr[1]:
            gexpr_atoms(sub, out)
    return out


def eval_gexpr(expr, values):
    """Evaluate a ground expression under an atom -> bool assignment."""
    kind = expr[0]
    if kind == "const":
        return expr[1]
    if kind in ("var", "prev", "new"):
        return values[expr]
    if kind == "not":
        return not eval_gexpr(expr[1], values)
    if kind == "and":
        return all(eval_gexpr(e, values) for e in expr[1])
    if kind == "or":
        return any(eval_gexpr(e, values) for e in expr[1])
    raise TypeError(expr)


def ml_apply(action, true_literals, var_values=None):
    """Apply an action's effect to a crisp world, variables all true by default.

    Statements run in order over a working copy: references to literals
    assigned earlier in the program see the new value, everything else still
    holds its prior value because it has not been touched yet.  Passing
    ``var_values`` (variable name to bool) plays out a sampled outcome
    instead of the most likely one.
    """
    current = set(true_literals)
    for st in action.statements:
        values = {}
        for atom in gexpr_atoms(st.expr):
            if atom[0] == "var":
                values[atom] = True if var_values is None else var_values[atom[1]]
            else:
                values[atom] = atom[1] in current
        if eval_gexpr(st.expr, values):
            current.add(st.target)
        else:
            current.discard(st.target)
    return frozenset(current)


def precondition_holds(action, true_literals):
    return all(
        (cond.literal in true_literals) == cond.positive for cond in action.precondition
    )
