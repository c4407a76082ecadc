//! Every example must run to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));
            #[test]
            fn runs() {
                main().unwrap();
            }
        }
    };
}

example!(attribution);
example!(baselines);
example!(bench);
example!(build_corpus);
example!(rewards);
example!(sweep);
example!(train_obfuscator);
example!(train_toy);
example!(verification);
