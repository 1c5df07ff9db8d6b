import json
import sys
from pathlib import Path

# make the shared oracle helpers importable regardless of invocation dir
sys.path.insert(0, str(Path(__file__).parent))


def write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
