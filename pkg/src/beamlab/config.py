"""Run configuration files.

A config is ``key = value`` text with ``#`` comments. Keys before the first
``[section]`` apply to every mode; a section named after a mode (``[steady]``,
``[unsteady]``, ``[converge-steady]``, ``[converge-unsteady]``) adds or
overrides keys for that mode only.
"""

import configparser
from dataclasses import dataclass

from .expr import ExprError, Expression, constant

MODES = ("steady", "unsteady", "converge-steady", "converge-unsteady")

KEYS = (
    "mode", "l", "T", "M", "h", "N", "tau", "r", "s", "j", "eta", "f", "g",
    "p", "q", "a", "a_tilde", "b", "b_tilde", "case", "sample_nx", "sample_nt",
    "h_list", "pair_list",
)

# experiment settings used when a builtin case leaves them unset
CASE_DEFAULTS = {
    "paper-steady": {"h": "1/50", "h_list": "1/4, 1/8, 1/16, 1/32, 1/64"},
    "paper-unsteady": {
        "h": "1/50", "tau": "1/1250", "T": "1",
        "pair_list": "1/10:1/50, 1/20:1/200, 1/40:1/800, 1/80:1/3200",
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str
    l: float = 1.0
    T: float = None
    M: int = None
    h: float = None
    N: int = None
    tau: float = None
    r: object = None
    s: object = None
    j: object = None
    eta: object = None
    f: object = None
    g: object = None
    p: object = None
    q: object = None
    a: object = None
    a_tilde: object = None
    b: object = None
    b_tilde: object = None
    case: str = None
    sample_nx: int = 101
    sample_nt: int = 51
    h_list: list = None
    pair_list: list = None

    def elements(self):
        if self.M is not None:
            return self.M
        count = self.l / self.h
        M = int(round(count))
        if M < 1 or abs(count - M) > 1e-9 * max(1.0, count):
            raise ConfigError(f"h = {self.h!r} does not divide l = {self.l!r} evenly")
        return M

    def steps(self):
        if self.N is not None:
            return self.N
        count = self.T / self.tau
        N = int(round(count))
        if N < 1 or abs(count - N) > 1e-9 * max(1.0, count):
            raise ConfigError(f"tau = {self.tau!r} does not divide T = {self.T!r} evenly")
        return N


def read_config_text(text, mode):
    """Key/value pairs that apply to `mode`, as raw strings."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[DEFAULT]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    raw = dict(parser.defaults())
    if parser.has_section(mode):
        raw.update({k: v for k, v in parser.items(mode)})
    return raw


def _int(key, text):
    value = _num(key, text)
    if value != int(value):
        raise ConfigError(f"{key} must be an integer, got {text!r}")
    return int(value)


def _num(key, text):
    try:
        return constant(text)
    except ExprError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _expr(key, text, variables):
    try:
        expr = Expression(text, variables)
    except ExprError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return expr if variables else expr.constant()


def build_config(raw, mode, case=None):
    """Validate raw strings into a RunConfig."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    unknown = sorted(set(raw) - set(KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if "mode" in raw and raw["mode"].strip() != mode:
        raise ConfigError(f"config mode {raw['mode'].strip()!r} does not match command {mode!r}")
    raw = dict(raw)
    if case is not None:
        raw["case"] = case
    name = raw.get("case", "").strip() or None
    if name is not None:
        if name not in CASE_DEFAULTS:
            raise ConfigError(f"unknown builtin case {name!r}; choose from {', '.join(CASE_DEFAULTS)}")
        wanted = "paper-steady" if mode in ("steady", "converge-steady") else "paper-unsteady"
        if name != wanted:
            raise ConfigError(f"case {name!r} cannot run in mode {mode!r}")

    both = [pair for pair in (("M", "h"), ("N", "tau")) if all(k in raw for k in pair)]
    for first, second in both:
        raise ConfigError(f"set only one of {first!r} and {second!r}, not both")
    if name is not None:
        for key, value in CASE_DEFAULTS[name].items():
            partner = {"h": "M", "tau": "N"}.get(key)
            if key not in raw and (partner is None or partner not in raw):
                raw[key] = value

    cfg = RunConfig(mode=mode, case=name)
    for key in ("l", "T", "h", "tau"):
        if key in raw:
            setattr(cfg, key, _num(key, raw[key]))
    for key in ("M", "N", "sample_nx", "sample_nt"):
        if key in raw:
            setattr(cfg, key, _int(key, raw[key]))
    if cfg.l <= 0:
        raise ConfigError("l must be positive")
    if cfg.sample_nx < 2 or cfg.sample_nt < 2:
        raise ConfigError("sample_nx and sample_nt must be at least 2")

    space = ("x",)
    spacetime = ("x", "t")
    time = ("t",)
    kinds = {"r": space, "s": space, "j": space, "eta": space, "f": space, "p": space,
             "q": space, "g": spacetime, "a": time, "a_tilde": time, "b": time, "b_tilde": time}
    if mode in ("steady", "converge-steady"):
        for key in ("a", "a_tilde", "b", "b_tilde"):
            kinds[key] = ()
    for key, variables in kinds.items():
        if key in raw:
            if name is not None:
                continue  # builtin case data take precedence
            setattr(cfg, key, _expr(key, raw[key], variables))

    if "h_list" in raw:
        cfg.h_list = [_num("h_list", item) for item in _split(raw["h_list"])]
    if "pair_list" in raw:
        pairs = []
        for item in _split(raw["pair_list"]):
            parts = item.split(":")
            if len(parts) != 2:
                raise ConfigError(f"pair_list entries look like h:tau, got {item!r}")
            pairs.append((_num("pair_list", parts[0]), _num("pair_list", parts[1])))
        cfg.pair_list = pairs

    _require(cfg, mode)
    return cfg


def _split(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def _require(cfg, mode):
    if mode in ("steady", "unsteady"):
        if cfg.M is None and cfg.h is None:
            raise ConfigError("set one of 'M' or 'h'")
        cfg.elements()
    if mode == "unsteady":
        if cfg.T is None:
            raise ConfigError("set the final time 'T'")
        if cfg.N is None and cfg.tau is None:
            raise ConfigError("set one of 'N' or 'tau'")
        cfg.steps()
    if mode.startswith("converge") and cfg.case is None:
        raise ConfigError("convergence modes need a builtin case with a known exact solution")
    if mode == "converge-steady" and (not cfg.h_list or len(cfg.h_list) < 3):
        raise ConfigError("h_list needs at least three step sizes")
    if mode == "converge-unsteady" and not cfg.pair_list:
        raise ConfigError("pair_list needs at least one h:tau pair")


def load_config(path, mode, case=None):
    if path is None:
        raw = {}
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
        raw = read_config_text(text, mode)
    return build_config(raw, mode, case)
