"""Run every subcommand and validate its JSON output against schemas/."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        doc["$id"] = path.resolve().as_uri()
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


def main():
    binary, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    registry = load_registry(schema_dir)
    failures = 0

    def run(args, expect=0):
        proc = subprocess.run([binary, *args], capture_output=True, text=True)
        if proc.returncode != expect:
            raise SystemExit(f"{args}: exit {proc.returncode}, stderr: {proc.stderr}")
        return proc.stdout

    def check(schema_name, text, label):
        nonlocal failures
        uri = (schema_dir / schema_name).resolve().as_uri()
        validator = jsonschema.Draft202012Validator(registry.contents(uri), registry=registry)
        errors = sorted(validator.iter_errors(json.loads(text)), key=lambda e: list(e.path))
        if errors:
            failures += 1
            print(f"FAIL {label}: {errors[0].message} at {list(errors[0].path)}")
        else:
            print(f"ok   {label}")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        model = tmp / "m.json"
        text = run(["generate", "--structure", "fig3", "--cards", "U=2,Z=2,W=2,Y=2,A=2",
                    "--seed", "7", "--force-invertible", "--force-distinct-rows"])
        model.write_text(text)
        check("generate.schema.json", text, "generate")
        check("model.schema.json", text, "model")

        mediator = tmp / "med.json"
        mediator.write_text(run(["generate", "--structure", "figA3", "--cards", "U=2,M=2,Z=2,W=2,Y=2,A=2",
                                 "--seed", "3", "--force-invertible", "--force-distinct-rows"]))
        frontdoor = tmp / "fd.json"
        frontdoor.write_text(run(["generate", "--structure", "figA1", "--cards", "U=2,M=2,Y=2,A=2",
                                  "--seed", "3"]))

        check("oracle.schema.json", run(["oracle", "--model", str(model)]), "oracle adjust")
        check("oracle.schema.json", run(["oracle", "--model", str(frontdoor), "--frontdoor", "M"]),
              "oracle frontdoor")
        for method, extra in (("bridge", []), ("eigen", []), ("cp", ["--rank", "2"])):
            check("identify.schema.json", run(["identify", "--method", method, "--model", str(model), *extra]),
                  f"identify {method}")
        check("identify.schema.json", run(["identify", "--method", "mediator", "--model", str(mediator)]),
              "identify mediator")
        check("audit.schema.json", run(["audit", "--model", str(model)]), "audit")
        check("compare.schema.json", run(["compare", "--model", str(model)]), "compare")
        check("compare.schema.json", run(["compare", "--model", str(frontdoor)]), "compare frontdoor")

        matrix = tmp / "k.json"
        matrix.write_text("[[1, 0, 1], [0, 1, 1]]")
        check("krank.schema.json", run(["krank", "--matrix", str(matrix)]), "krank")

        tensor = tmp / "t.json"
        tensor.write_text(json.dumps({"dims": [2, 2, 2],
                                      "entries": [0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1]}))
        check("cp.schema.json", run(["cp", "--tensor", str(tensor), "--rank", "2", "--seed", "1"]), "cp")

        out_dir = tmp / "wit"
        run(["search", "--budget", "200", "--seed", "1", "--out", str(out_dir) + "/"])
        check("search.schema.json", (out_dir / "search.json").read_text(), "search")
        for witness in sorted(out_dir.glob("*_0.json")):
            check("witness.schema.json", witness.read_text(), f"witness {witness.stem}")
            check("verify.schema.json", run(["verify", "--witness", str(witness)]), f"verify {witness.stem}")

        check("sem.schema.json", run(["sem", "--random", "4", "--draws", "2000", "--seed", "2"]), "sem")

    print(f"{failures} schema failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
