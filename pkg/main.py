import sys

from dunkl_oscillator import cli


def main():
    return cli.main()


if __name__ == "__main__":
    sys.exit(main())
