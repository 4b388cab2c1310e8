"""Bundled experiment files, one per cookbook experiment."""

from importlib import resources


def experiment_names() -> list:
    root = resources.files(__package__)
    return sorted(
        entry.name[: -len(".vqol")]
        for entry in root.iterdir()
        if entry.name.endswith(".vqol")
    )


def experiment_text(name: str) -> str:
    resource = resources.files(__package__).joinpath(f"{name}.vqol")
    if not resource.is_file():
        raise KeyError(f"no bundled experiment named {name!r}; "
                       f"available: {', '.join(experiment_names())}")
    return resource.read_text(encoding="utf-8")
