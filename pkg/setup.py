import setuptools


def main() -> None:
    setuptools.setup()


if __name__ == "__main__":
    main()
