import os
import sys
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from functools import partial
from typing import List, Optional

import trio
from rich.console import Console

from errors import RadarError
from handlers.commands import CommandRunner, build_parser, check_paths
from logger import lg

console = Console()


async def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    check_paths(args)
    return await CommandRunner().run(args)


def run(argv: Optional[List[str]] = None) -> int:
    try:
        return trio.run(partial(main, argv))
    except KeyboardInterrupt:
        console.print("\n[bold yellow]Прервано пользователем.[/bold yellow]")
        return 130
    except RadarError as e:
        console.print(f"[bold red]Ошибка: {e}[/bold red]")
        lg.error(f"Команда завершилась ошибкой: {e}", exc_info=True)
        return 1
    except Exception as e:
        console.print(f"[bold red]Произошла критическая ошибка: {e}[/bold red]")
        lg.error("Критическая ошибка на верхнем уровне radar/main.py", exc_info=True)
        return 2


if __name__ == "__main__":
    sys.exit(run())
