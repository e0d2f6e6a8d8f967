# ./numdiff/module_utils/common/command.py

from __future__ import annotations

from typing import Any, Dict, Optional

from ansible.module_utils.common.arg_spec import ArgumentSpecValidator

EXAMPLES = r'''
Using:
from numdiff.module_utils.common.command import CommandModule

def run_module(params):
    module = CommandModule(argument_spec=dict(config=dict(type='path', required=True)),
                           params=params)
    ...
    module.exit_json(changed=True, msg="done")
'''

# Exit codes of a finished command
RC_OK = 0
RC_CONFIG = 1
RC_PARTIAL = 2


class CommandExit(Exception):
    """
    Carries the result document of a command out of `run_module`

    Args:
        result: JSON-serialisable result, always holding `changed`, `msg` and `rc`
    """

    def __init__(self, result: Dict[str, Any]):
        super().__init__(result.get("msg", ""))
        self.result = result

    @property
    def rc(self) -> int:
        return int(self.result.get("rc", RC_OK))


class CommandModule:
    """
    Validates the parameters of a command against its argument_spec and ends it with a result.

    Mirrors the module contract: `params` holds validated values,
    `exit_json` ends successfully, `fail_json` ends with `failed: true`.
    """

    def __init__(self, argument_spec: Dict[str, Any], params: Optional[Dict[str, Any]] = None):
        """
        Args:
            argument_spec: Parameter specification
            params: Raw parameters, None values count as unset
        """
        self.argument_spec = argument_spec
        raw = {key: value for key, value in (params or {}).items() if value is not None}
        result = ArgumentSpecValidator(argument_spec).validate(raw)
        if result.error_messages:
            self.fail_json(msg="; ".join(result.error_messages),
                           errors=list(result.error_messages))
        self.params = result.validated_parameters

    def exit_json(self, **kwargs) -> None:
        kwargs.setdefault("changed", False)
        kwargs.setdefault("msg", "")
        kwargs.setdefault("rc", RC_OK)
        raise CommandExit(kwargs)

    def fail_json(self, msg: str, rc: int = RC_CONFIG, **kwargs) -> None:
        kwargs.setdefault("changed", False)
        kwargs.update(failed=True, msg=msg, rc=rc)
        raise CommandExit(kwargs)
