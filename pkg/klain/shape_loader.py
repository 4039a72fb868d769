import os
import json
import logging
from math import comb
from typing import Any, Dict, Optional, Tuple

import chardet
import numpy as np

from .errors import DuplicateVertex, NonExtremeVertex, SchemaError
from .klain_functions import QuadraticForm
from .polytope_geometry import Polytope


class ShapeLoader:
    def __init__(self, path: str):
        """
        Loader for the JSON inputs of the lab.

        Polytope files:   {"n": 3, "vertices": [[0, 0, 0], [1, 0, 0], ...]}
        Quadratic files:  {"n": 4, "k": 2, "matrix": [[...], ...]}

        Args:
            path: Path to the JSON file
        """
        self.path = path
        self.text: Optional[str] = None
        self.encoding: Optional[str] = None
        self.logger = logging.getLogger(__name__)

    def _detect_file_encoding(self) -> str:
        """Detect file encoding using chardet."""
        try:
            with open(self.path, "rb") as f:
                raw_data = f.read(10000)
            result = chardet.detect(raw_data)
            encoding = result.get("encoding") or "utf-8"
            if result.get("confidence", 0) > 0.7:
                return encoding
            return "utf-8"
        except OSError as e:
            self.logger.warning(f"Encoding detection failed for {self.path}: {e}")
            return "utf-8"

    def _read_with_fallback_encoding(self) -> str:
        if not os.path.exists(self.path):
            raise FileNotFoundError(f"Input file not found: {self.path}")

        encodings = [self._detect_file_encoding(), "utf-8", "utf-16", "latin1"]
        for encoding in dict.fromkeys(encodings):
            try:
                with open(self.path, "r", encoding=encoding) as f:
                    text = f.read()
            except (UnicodeDecodeError, UnicodeError) as e:
                self.logger.debug(f"Encoding {encoding} failed for {self.path}: {e}")
                continue
            if text.strip():
                if encoding != "utf-8":
                    self.logger.warning(f"Read {self.path} with encoding {encoding}")
                self.encoding = encoding
                return text

        raise SchemaError("file is empty or not decodable", path=self.path)

    def _line_of(self, field: str) -> Optional[int]:
        """1-based line where a key first appears, for diagnostics."""
        if self.text is None:
            return None
        needle = f'"{field}"'
        for lineno, line in enumerate(self.text.splitlines(), start=1):
            if needle in line:
                return lineno
        return None

    def _fail(self, message: str, field: Optional[str] = None) -> SchemaError:
        return SchemaError(message, path=self.path, field=field, line=self._line_of(field) if field else None)

    def read_json(self) -> Dict[str, Any]:
        self.text = self._read_with_fallback_encoding()
        try:
            data = json.loads(self.text)
        except json.JSONDecodeError as e:
            raise SchemaError(f"malformed JSON: {e.msg}", path=self.path, line=e.lineno)
        if not isinstance(data, dict):
            raise SchemaError("top level must be a JSON object", path=self.path, line=1)
        return data

    def _require_int(self, data: Dict[str, Any], field: str, minimum: int) -> int:
        if field not in data:
            raise self._fail("missing required field", field)
        value = data[field]
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise self._fail(f"expected an integer >= {minimum}, got {value!r}", field)
        return value

    def _numeric_array(self, data: Dict[str, Any], field: str) -> np.ndarray:
        if field not in data:
            raise self._fail("missing required field", field)
        try:
            arr = np.array(data[field], dtype=float)
        except (TypeError, ValueError):
            raise self._fail("expected a rectangular array of numbers", field)
        if arr.ndim != 2:
            raise self._fail(f"expected a 2-d array, got {arr.ndim} dimension(s)", field)
        if not np.all(np.isfinite(arr)):
            raise self._fail("entries must be finite", field)
        return arr

    def _validate_vertices(self, vertices: np.ndarray, n: int) -> Tuple[bool, str]:
        if vertices.shape[0] == 0:
            return False, "no vertices given"
        if vertices.shape[1] != n:
            return False, f"vertices have {vertices.shape[1]} coordinates but n = {n}"
        return True, "Valid"

    def load_polytope(self) -> Polytope:
        data = self.read_json()
        n = self._require_int(data, "n", 1)
        vertices = self._numeric_array(data, "vertices")
        is_valid, msg = self._validate_vertices(vertices, n)
        if not is_valid:
            raise self._fail(msg, "vertices")
        try:
            polytope = Polytope(vertices)
        except (DuplicateVertex, NonExtremeVertex) as e:
            raise self._fail(str(e), "vertices") from e
        self.logger.info(f"Loaded {polytope!r} from {self.path}")
        return polytope

    def load_quadratic(self, n: Optional[int] = None, k: Optional[int] = None) -> QuadraticForm:
        data = self.read_json()
        file_n = self._require_int(data, "n", 1)
        file_k = self._require_int(data, "k", 0)
        if file_k > file_n:
            raise self._fail(f"k = {file_k} exceeds n = {file_n}", "k")
        if n is not None and n != file_n:
            raise self._fail(f"form is on R^{file_n} but R^{n} was requested", "n")
        if k is not None and k != file_k:
            raise self._fail(f"form is on {file_k}-planes but k = {k} was requested", "k")

        size = comb(file_n, file_k)
        matrix = self._numeric_array(data, "matrix")
        if matrix.shape != (size, size):
            raise self._fail(f"expected a {size}x{size} matrix (C(n, k) = {size}), got {matrix.shape}", "matrix")
        if not np.allclose(matrix, matrix.T, atol=1e-12):
            self.logger.warning(f"{self.path}: matrix is not symmetric, using (Q + Q^T)/2")
        return QuadraticForm(matrix, file_n, file_k)


def load_polytope(path: str) -> Polytope:
    return ShapeLoader(path).load_polytope()


def load_quadratic(path: str, n: Optional[int] = None, k: Optional[int] = None) -> QuadraticForm:
    return ShapeLoader(path).load_quadratic(n, k)
