"""module with utils for e2e tests"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional

BASE_DATA_PATH = Path(f"{__file__}").parent / Path("files")
SMALL_CONFIG = BASE_DATA_PATH / "configs/small.yml"


@dataclass
class Command:
    """
    Represents the command and their arguments and
    provides methods to render it for cmd runners
    """

    command: str
    inputs: List[Path] = field(default_factory=list)
    program_name: str = "noise-spectroscopy"
    config: Optional[Path] = None
    out: Optional[Path] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    verbosity: int = 0
    stamp: bool = False
    overrides: List[str] = field(default_factory=list)
    extra: List[str] = field(default_factory=list)

    def __str__(self) -> str:
        return self.to_string()

    def __iter__(self) -> Iterable:
        return (item for item in self.to_list())

    def to_list(self) -> List:
        result = [self.program_name, self.command]
        result.extend(str(path) for path in self.inputs)

        if self.config:
            result.extend(["-c", str(self.config.absolute())])
        if self.out:
            result.extend(["-o", str(self.out)])
        if self.seed is not None:
            result.extend(["--seed", str(self.seed)])
        if self.workers is not None:
            result.extend(["--workers", str(self.workers)])
        if self.verbosity > 0:
            result.append(f"-{'v' * self.verbosity}")
        if self.stamp:
            result.append("--stamp")
        for item in self.overrides:
            result.extend(["--set", item])
        result.extend(self.extra)

        return result

    def to_string(self) -> str:
        return " ".join(self.to_list())


def read_json(path: Path) -> Dict:
    with open(path) as f:
        return json.load(f)
