﻿import json
import os
from pathlib import Path
from typing import Any, Optional, Union

import jsonschema

PathLike = Union[str, os.PathLike]


def save_to_json(
    data: Any,
    folder_path: PathLike,
    filename: str,
    schema: Optional[dict] = None,
) -> Path:
    """Persist JSON-serialisable data under the specified folder."""
    if schema is not None:
        jsonschema.validate(instance=data, schema=schema)
    path = Path(folder_path)
    path.mkdir(parents=True, exist_ok=True)
    file_path = path / filename
    with file_path.open('w', encoding='utf-8') as handle:
        json.dump(data, handle, ensure_ascii=False, indent=4)
    print(f"Successfully saved data to {file_path}")
    return file_path


def save_text(text: str, folder_path: PathLike, filename: str) -> Path:
    """Persist a text artifact (DOT graph, pretty-printed spec)."""
    path = Path(folder_path)
    path.mkdir(parents=True, exist_ok=True)
    file_path = path / filename
    file_path.write_text(text, encoding='utf-8')
    print(f"Successfully saved data to {file_path}")
    return file_path
