"""Validate config files against docs/config.schema.json.

Files named invalid_* must be rejected, all others accepted.
"""
import json
import pathlib
import sys

import jsonschema


def main(schema_path, config_dir):
    schema = json.loads(pathlib.Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for path in sorted(pathlib.Path(config_dir).glob("*.json")):
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        expect_invalid = path.name.startswith("invalid")
        if bool(errors) != expect_invalid:
            failures += 1
            detail = errors[0].message if errors else "accepted"
            print(f"FAIL {path.name}: {detail}")
        else:
            print(f"ok   {path.name}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
