# ./tests/unit/module_utils/common/test_command.py

import pytest

from numdiff.module_utils.common.command import RC_CONFIG, RC_OK, RC_PARTIAL, CommandExit, CommandModule

SPEC = dict(
    config=dict(type='path', required=True),
    jobs=dict(type='int', default=1),
)


def test_params_are_validated_and_defaulted():
    module = CommandModule(argument_spec=SPEC, params={"config": "experiment.yml", "jobs": None})
    assert module.params["jobs"] == 1
    assert module.params["config"].endswith("experiment.yml")


def test_missing_required_parameter_fails():
    with pytest.raises(CommandExit) as excinfo:
        CommandModule(argument_spec=SPEC, params={})
    assert excinfo.value.rc == RC_CONFIG
    assert excinfo.value.result["failed"] is True
    assert "config" in excinfo.value.result["msg"]


def test_wrong_type_fails():
    with pytest.raises(CommandExit) as excinfo:
        CommandModule(argument_spec=SPEC, params={"config": "x.yml", "jobs": "many"})
    assert "jobs" in excinfo.value.result["msg"]


def test_exit_json_defaults():
    module = CommandModule(argument_spec=SPEC, params={"config": "x.yml"})
    with pytest.raises(CommandExit) as excinfo:
        module.exit_json(files=["a.csv"])
    assert excinfo.value.result == {"files": ["a.csv"], "changed": False, "msg": "", "rc": RC_OK}


def test_fail_json_keeps_partial_rc():
    module = CommandModule(argument_spec=SPEC, params={"config": "x.yml"})
    with pytest.raises(CommandExit) as excinfo:
        module.fail_json(msg="1 cell failed", rc=RC_PARTIAL, changed=True)
    assert excinfo.value.rc == RC_PARTIAL
    assert excinfo.value.result["changed"] is True
    assert str(excinfo.value) == "1 cell failed"
