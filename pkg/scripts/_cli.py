"""Turn a dataclass of defaults into command-line flags."""

import argparse
import dataclasses


def parse(config_cls, description):
    p = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(config_cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            p.add_argument(flag, type=lambda s: s.lower() in ("1", "true", "yes"), default=default)
        elif isinstance(default, (list, tuple)):
            kind = type(default[0]) if default else float
            p.add_argument(flag, type=kind, nargs="+", default=list(default))
        else:
            p.add_argument(flag, type=type(default), default=default)
    return config_cls(**vars(p.parse_args()))
