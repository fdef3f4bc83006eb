from .cli import main_script

main_script()
